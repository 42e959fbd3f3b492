import json

import numpy as np
import pytest

from oriform.errors import ParseError, SchemaError
from oriform.rotation import is_rotation
from oriform.scenario import (
    load_scenario,
    parse_scenario,
    template_scenario,
    write_scenario,
)


def minimal(**extra):
    raw = {
        "graph": {
            "n_vertices": 2,
            "edges": [{"from": 0, "to": 1}, {"from": 1, "to": 0}],
        },
    }
    raw.update(extra)
    return raw


class TestSchemaErrors:
    def test_unknown_top_level_key(self):
        with pytest.raises(SchemaError, match="bogus"):
            parse_scenario(minimal(bogus=1))

    def test_missing_graph(self):
        with pytest.raises(SchemaError, match="graph"):
            parse_scenario({"dimension": 3})

    def test_unknown_agent_key(self):
        raw = minimal(agents=[{"position": [0, 0, 0], "color": "red"},
                              {"position": [1, 0, 0]}])
        with pytest.raises(SchemaError, match="color"):
            parse_scenario(raw)

    def test_agent_count_mismatch(self):
        raw = minimal(agents=[{"position": [0, 0, 0]}])
        with pytest.raises(SchemaError, match="agent"):
            parse_scenario(raw)

    def test_edge_missing_endpoint(self):
        raw = {"graph": {"n_vertices": 2, "edges": [{"from": 0}]}}
        with pytest.raises(SchemaError, match="edges"):
            parse_scenario(raw)

    def test_bad_orientation_entry_count(self):
        raw = minimal(agents=[{"orientation": [1, 0, 0, 1]},
                              {"orientation": "random"}])
        with pytest.raises(SchemaError, match="orientation"):
            parse_scenario(raw)

    def test_non_rotation_orientation(self):
        flat_reflection = [1, 0, 0, 0, 1, 0, 0, 0, -1]
        raw = minimal(agents=[{"orientation": flat_reflection},
                              {"orientation": "random"}])
        with pytest.raises(Exception):
            parse_scenario(raw)

    def test_partial_field_coverage(self):
        raw = minimal(agents=[{"position": [0, 0, 0]}, {}])
        with pytest.raises(SchemaError, match="all or no"):
            parse_scenario(raw)

    def test_desired_formation_shape(self):
        raw = minimal(desired_formation=[[0.0, 0.0, 0.0]])
        with pytest.raises(SchemaError, match="desired_formation"):
            parse_scenario(raw)

    def test_estimator_init_needs_values_or_random(self):
        raw = minimal(estimator_init={})
        with pytest.raises(SchemaError, match="estimator_init"):
            parse_scenario(raw)

    def test_unknown_integrator_key(self):
        raw = minimal(integrator={"dt": 0.01, "tolerance": 1e-8})
        with pytest.raises(SchemaError, match="tolerance"):
            parse_scenario(raw)


class TestParsing:
    def test_defaults(self):
        sc = parse_scenario(minimal())
        assert sc.dimension == 3
        assert sc.n_agents == 2
        assert sc.k_u == 1.0
        assert sc.z0 is None

    def test_axis_angle_orientation(self):
        raw = minimal(agents=[
            {"orientation": {"axis": [0, 0, 1], "angle": np.pi / 2}},
            {"orientation": "random"},
        ])
        sc = parse_scenario(raw)
        assert np.allclose(sc.orientations[0] @ [1, 0, 0], [0, 1, 0],
                           atol=1e-12)
        assert is_rotation(sc.orientations[1])

    def test_random_fields_deterministic_in_seed(self):
        raw = minimal(seed=42, agents=[
            {"orientation": "random", "position": "random"},
            {"orientation": "random", "position": "random"},
        ])
        a = parse_scenario(raw)
        b = parse_scenario(json.loads(json.dumps(raw)))
        assert np.array_equal(a.orientations, b.orientations)
        assert np.array_equal(a.positions, b.positions)

    def test_different_seeds_differ(self):
        make = lambda s: parse_scenario(minimal(
            seed=s, agents=[{"position": "random"}, {"position": "random"}]))
        assert not np.array_equal(make(1).positions, make(2).positions)

    def test_edge_gains(self):
        raw = minimal(gains={"k_u": 2.0,
                             "edges": [{"from": 0, "to": 1, "l": 3.0}]})
        sc = parse_scenario(raw)
        assert sc.k_u == 2.0
        assert sc.edge_gains == {(0, 1): 3.0}

    def test_explicit_estimator_values(self):
        z = np.arange(12.0).reshape(2, 2, 3) + 1.0
        raw = minimal(estimator_init={"values": z.tolist()})
        sc = parse_scenario(raw)
        assert np.array_equal(sc.z0.z, z)

    def test_theta_wrapping(self):
        raw = minimal(agents=[{"theta": 7.0}, {"theta": -7.0}])
        sc = parse_scenario(raw)
        assert np.all(sc.thetas > -np.pi) and np.all(sc.thetas <= np.pi)

    def test_oscillator_state_requires_thetas(self):
        with pytest.raises(SchemaError):
            parse_scenario(minimal()).oscillator_state()

    def test_formation_scenario_requires_fields(self):
        with pytest.raises(SchemaError):
            parse_scenario(minimal()).formation_scenario()


class TestLoadAndTemplates:
    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "nope.json")

    def test_load_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            load_scenario(p)

    def test_roundtrip(self, tmp_path):
        raw = template_scenario("fig3", seed=7)
        p = tmp_path / "fig3.json"
        write_scenario(raw, p)
        sc = load_scenario(p)
        assert sc.n_agents == 6
        assert sc.seed == 7
        assert sc.orientations.shape == (6, 3, 3)
        sc.formation_scenario()
        sc.localization_scenario()

    def test_circle_template(self):
        sc = parse_scenario(template_scenario("all2all-circle20"))
        state = sc.oscillator_state()
        assert len(state.theta) == 20
        # evenly spaced over the full circle
        gaps = np.diff(np.sort(state.theta))
        assert np.allclose(gaps, np.pi / 10)

    def test_unknown_template(self):
        with pytest.raises(SchemaError):
            template_scenario("mystery")

    def test_template_materialization_deterministic(self):
        raw = template_scenario("chain", seed=3)
        a = parse_scenario(raw)
        b = parse_scenario(raw)
        assert np.array_equal(a.orientations, b.orientations)
        assert np.array_equal(a.z0.z, b.z0.z)
