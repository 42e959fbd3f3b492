"""Scenario files: JSON schema, validation, randomized-field
materialization, and named templates.

Top-level keys: dimension, graph, agents, desired_formation, gains,
estimator_init, integrator, seed.  Unknown keys are rejected with
field-level messages.  Fields declared as "random" are materialized
deterministically from the scenario seed at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rotation
from .circle import OscillatorState, wrap_angle
from .errors import ParseError, SchemaError
from .estimator import EstimatorState
from .formation import FormationScenario
from .graph import DiGraph
from .localization import LocalizationScenario

# Six-agent interaction topology used throughout the examples: a
# directed sensing ring with two chords, which has a rooted-out branch
# and a well-separated consensus rate.
FIG3_EDGES = (
    (0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0),
    (5, 0, 1.0), (1, 4, 1.0), (3, 0, 1.0),
)

TOP_KEYS = {"dimension", "graph", "agents", "desired_formation", "gains",
            "estimator_init", "integrator", "seed"}
AGENT_KEYS = {"orientation", "position", "position_estimate", "theta"}
GAIN_KEYS = {"k_u", "edges"}
ESTIMATOR_KEYS = {"values", "random", "seed"}
INTEGRATOR_KEYS = {"dt", "horizon", "method", "record_every"}


@dataclass
class Scenario:
    """Validated, fully materialized scenario contents."""

    dimension: int
    graph: DiGraph
    orientations: np.ndarray | None
    positions: np.ndarray | None
    position_estimates: np.ndarray | None
    thetas: np.ndarray | None
    desired_formation: np.ndarray | None
    k_u: float
    edge_gains: dict
    z0: EstimatorState | None
    integrator: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def n_agents(self):
        return self.graph.n_vertices

    def formation_scenario(self) -> FormationScenario:
        if self.orientations is None:
            raise SchemaError("scenario has no agent orientations")
        if self.positions is None:
            raise SchemaError("scenario has no agent positions")
        if self.desired_formation is None:
            raise SchemaError("scenario has no desired_formation")
        return FormationScenario(self.graph, self.orientations, self.positions,
                                 self.desired_formation, self.k_u,
                                 dict(self.edge_gains))

    def localization_scenario(self) -> LocalizationScenario:
        if self.orientations is None:
            raise SchemaError("scenario has no agent orientations")
        if self.positions is None:
            raise SchemaError("scenario has no agent positions (ground truth)")
        if self.position_estimates is None:
            raise SchemaError("scenario has no agent position_estimate fields")
        return LocalizationScenario(self.graph, self.orientations,
                                    self.positions, self.position_estimates,
                                    self.k_u, dict(self.edge_gains))

    def oscillator_state(self) -> OscillatorState:
        if self.thetas is None:
            raise SchemaError("scenario has no agent theta fields")
        return OscillatorState(self.thetas)


def _require_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise SchemaError(f"{where} must be an object")
    unknown = set(d) - allowed
    if unknown:
        raise SchemaError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parse_graph(raw):
    _require_keys(raw, {"n_vertices", "edges"}, "graph")
    if "n_vertices" not in raw:
        raise SchemaError("graph.n_vertices is required")
    edges = []
    for idx, e in enumerate(raw.get("edges", [])):
        _require_keys(e, {"from", "to", "weight"}, f"graph.edges[{idx}]")
        if "from" not in e or "to" not in e:
            raise SchemaError(f"graph.edges[{idx}] needs 'from' and 'to'")
        edges.append((e["from"], e["to"], e.get("weight", 1.0)))
    return DiGraph(int(raw["n_vertices"]), tuple(edges))


def _parse_orientation(raw, n, rng, where):
    if isinstance(raw, str):
        if raw != "random":
            raise SchemaError(f"{where}: unknown directive {raw!r}")
        return rotation.random_rotation(n, rng)
    if isinstance(raw, dict):
        _require_keys(raw, {"axis", "angle"}, where)
        if n != 3:
            raise SchemaError(f"{where}: axis-angle form needs dimension 3")
        if "axis" not in raw or "angle" not in raw:
            raise SchemaError(f"{where}: axis-angle form needs both fields")
        return rotation.axis_angle_matrix(np.asarray(raw["axis"], dtype=float),
                                         float(raw["angle"]))
    M = np.asarray(raw, dtype=float)
    if M.size != n * n:
        raise SchemaError(f"{where}: expected {n * n} entries (row-major)")
    return rotation.require_rotation(M.reshape(n, n), name=where)


def _parse_vector(raw, n, rng, where, spread=5.0):
    if isinstance(raw, str):
        if raw != "random":
            raise SchemaError(f"{where}: unknown directive {raw!r}")
        return rng.uniform(-spread, spread, n)
    v = np.asarray(raw, dtype=float)
    if v.shape != (n,):
        raise SchemaError(f"{where}: expected a {n}-vector")
    return v


def parse_scenario(raw, origin="<scenario>") -> Scenario:
    _require_keys(raw, TOP_KEYS, origin)
    if "graph" not in raw:
        raise SchemaError("top-level 'graph' is required")
    n = int(raw.get("dimension", 3))
    if n < 2:
        raise SchemaError("dimension must be at least 2")
    seed = raw.get("seed")
    rng = np.random.default_rng(seed)
    g = _parse_graph(raw["graph"])
    N = g.n_vertices

    agents = raw.get("agents", [])
    if agents and len(agents) != N:
        raise SchemaError(f"expected {N} agent records, got {len(agents)}")

    orientations, positions, estimates, thetas = [], [], [], []
    for idx, a in enumerate(agents):
        where = f"agents[{idx}]"
        _require_keys(a, AGENT_KEYS, where)
        if "orientation" in a:
            orientations.append(
                _parse_orientation(a["orientation"], n, rng, f"{where}.orientation"))
        if "position" in a:
            positions.append(
                _parse_vector(a["position"], n, rng, f"{where}.position"))
        if "position_estimate" in a:
            estimates.append(
                _parse_vector(a["position_estimate"], n, rng,
                              f"{where}.position_estimate"))
        if "theta" in a:
            t = a["theta"]
            if isinstance(t, str):
                if t != "random":
                    raise SchemaError(f"{where}.theta: unknown directive {t!r}")
                t = rng.uniform(-np.pi, np.pi)
            thetas.append(float(t))

    def _homogeneous(values, name):
        if values and len(values) != len(agents):
            raise SchemaError(f"either all or no agents must carry {name}")
        return np.asarray(values) if values else None

    orientations = _homogeneous(orientations, "orientation")
    positions = _homogeneous(positions, "position")
    estimates = _homogeneous(estimates, "position_estimate")
    thetas = _homogeneous(thetas, "theta")
    if thetas is not None:
        thetas = wrap_angle(thetas)

    desired = raw.get("desired_formation")
    if desired is not None:
        desired = np.asarray(desired, dtype=float)
        if desired.shape != (N, n):
            raise SchemaError(f"desired_formation must be {N} x {n}")

    gains = raw.get("gains", {})
    _require_keys(gains, GAIN_KEYS, "gains")
    k_u = float(gains.get("k_u", 1.0))
    edge_gains = {}
    for idx, e in enumerate(gains.get("edges", [])):
        _require_keys(e, {"from", "to", "l"}, f"gains.edges[{idx}]")
        if not {"from", "to", "l"} <= set(e):
            raise SchemaError(f"gains.edges[{idx}] needs from, to, l")
        edge_gains[(int(e["from"]), int(e["to"]))] = float(e["l"])

    z0 = None
    ei = raw.get("estimator_init")
    if ei is not None:
        _require_keys(ei, ESTIMATOR_KEYS, "estimator_init")
        if "values" in ei:
            z = np.asarray(ei["values"], dtype=float)
            if z.shape != (N, n - 1, n):
                raise SchemaError(
                    f"estimator_init.values must be {N} x {n - 1} x {n}")
            z0 = EstimatorState(z)
        elif ei.get("random"):
            z0 = EstimatorState.random(
                N, n, np.random.default_rng(ei.get("seed", seed)))
        else:
            raise SchemaError("estimator_init needs 'values' or random: true")

    integ = raw.get("integrator", {})
    _require_keys(integ, INTEGRATOR_KEYS, "integrator")

    return Scenario(n, g, orientations, positions, estimates, thetas, desired,
                    k_u, edge_gains, z0, dict(integ), seed)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    return parse_scenario(raw, origin=str(path))


# ---------------------------------------------------------------------------
# Templates

def template_scenario(name, seed=0) -> dict:
    """Named randomized scenario as a JSON-compatible dict.

    Randomized fields stay symbolic ("random"); loading materializes
    them from the embedded seed, so generation is trivially
    deterministic.
    """
    if name == "fig3":
        return {
            "dimension": 3,
            "seed": int(seed),
            "graph": {
                "n_vertices": 6,
                "edges": [{"from": i, "to": j, "weight": w}
                          for i, j, w in FIG3_EDGES],
            },
            "agents": [
                {"orientation": "random", "position": "random",
                 "position_estimate": "random"}
                for _ in range(6)
            ],
            "desired_formation": [
                [1.0, 0.0, 0.0], [0.5, 0.866, 0.0], [-0.5, 0.866, 0.0],
                [-1.0, 0.0, 0.0], [-0.5, -0.866, 0.0], [0.5, -0.866, 1.0],
            ],
            "gains": {"k_u": 1.0},
            "estimator_init": {"random": True, "seed": int(seed)},
            "integrator": {"dt": 0.001, "horizon": 60.0, "record_every": 100},
        }
    if name == "chain":
        n = 4
        return {
            "dimension": 3,
            "seed": int(seed),
            "graph": {
                "n_vertices": n,
                "edges": [{"from": i + 1, "to": i, "weight": 1.0}
                          for i in range(n - 1)],
            },
            "agents": [
                {"orientation": "random", "position": "random",
                 "position_estimate": "random"}
                for _ in range(n)
            ],
            "desired_formation": [[float(i), 0.0, 0.0] for i in range(n)],
            "gains": {"k_u": 1.0},
            "estimator_init": {"random": True, "seed": int(seed)},
            "integrator": {"dt": 0.001, "horizon": 60.0, "record_every": 100},
        }
    if name == "all2all-circle20":
        n = 20
        return {
            "dimension": 3,
            "seed": int(seed),
            "graph": {
                "n_vertices": n,
                "edges": [{"from": i, "to": j, "weight": 1.0}
                          for i in range(n) for j in range(n) if i != j],
            },
            "agents": [{"theta": float(-np.pi + 2.0 * np.pi * (i + 1) / n)}
                       for i in range(n)],
            "integrator": {"dt": 0.001, "horizon": 20.0, "record_every": 100},
        }
    raise SchemaError(f"unknown template {name!r}; "
                      "available: fig3, chain, all2all-circle20")


def write_scenario(raw: dict, path):
    Path(path).write_text(json.dumps(raw, indent=2) + "\n")
