"""Command-line front door: run experiments, emit CSV trajectories and
machine-readable convergence reports.

Exit codes: 0 converged, 2 not converged, 3 refused (invalid
initialization), 4 input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import estimator as est
from . import rotation, scenario
from .circle import OscillatorState, run_circle
from .errors import (
    InvalidInitialization,
    InvariantViolation,
    OriformError,
    ParseError,
    SchemaError,
)
from .formation import run_formation
from .localization import run_localization

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 2
EXIT_REFUSED = 3
EXIT_INPUT_ERROR = 4


def _load(path, seed_override=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if seed_override is not None:
        raw["seed"] = seed_override
        if isinstance(raw.get("estimator_init"), dict) and \
                raw["estimator_init"].get("random"):
            raw["estimator_init"]["seed"] = seed_override
    sc = scenario.parse_scenario(raw, origin=str(path))
    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    return sc, digest


def _integrator_args(sc, args, default_horizon=60.0):
    integ = sc.integrator
    dt = args.dt if args.dt is not None else float(integ.get("dt", 0.001))
    horizon = (args.horizon if args.horizon is not None
               else float(integ.get("horizon", default_horizon)))
    stride = (args.record_every if args.record_every is not None
              else int(integ.get("record_every", 100)))
    return dt, horizon, stride


def _write_report(out_dir, stem, command, digest, report, elapsed):
    payload = {
        "command": command,
        "scenario_digest": digest,
        "wall_clock_s": elapsed,
    }
    for key, value in report.items():
        if isinstance(value, np.ndarray):
            continue
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        payload[key] = value
    path = Path(out_dir) / f"{stem}_{command}_report.json"
    path.write_text(json.dumps(payload, indent=2, default=str) + "\n")
    return path


def _verdict_exit(report, refused=False):
    if refused:
        return EXIT_REFUSED
    return EXIT_CONVERGED if report.get("converged") else EXIT_NOT_CONVERGED


def _summary(command, path, report, code):
    verdict = {EXIT_CONVERGED: "converged", EXIT_NOT_CONVERGED: "not converged",
               EXIT_REFUSED: "refused"}[code]
    if command == "circle":
        verdict = "synchronized" if code == EXIT_CONVERGED else "not synchronized"
    print(f"[{command}] {path}: {verdict}", file=sys.stderr)


def _run_estimate(path, args):
    sc, digest = _load(path, args.seed)
    if sc.orientations is None:
        raise SchemaError(f"{path}: estimate needs agent orientations")
    z0 = sc.z0 or est.EstimatorState.random(
        sc.n_agents, sc.dimension, np.random.default_rng(sc.seed))
    dt, horizon, stride = _integrator_args(sc, args)
    t0 = time.perf_counter()
    try:
        result = est.run_estimation(sc.graph, sc.orientations, z0, horizon,
                                    dt=dt, record_every=stride,
                                    force=args.force)
    except InvalidInitialization as exc:
        print(f"[estimate] {path}: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    elapsed = time.perf_counter() - t0

    stem = Path(path).stem
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{stem}_estimate.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        n = sc.dimension
        writer.writerow(["t", "agent", "slot"]
                        + [f"z_{c}" for c in range(n)] + ["est_err"])
        for s, t in enumerate(result.times):
            err = np.full(sc.n_agents, np.nan)
            if result.c_star is not None:
                try:
                    aligned = est.aligned_estimates(result.aux[s],
                                                    sc.orientations)
                    err = np.array([rotation.rotation_distance(a, result.c_star)
                                    for a in aligned])
                except OriformError:
                    pass
            for i in range(sc.n_agents):
                for k in range(n - 1):
                    writer.writerow([f"{t:.6f}", i, k]
                                    + [f"{v:.12g}" for v in result.aux[s, i, k]]
                                    + [f"{err[i]:.12g}"])
    code = _verdict_exit(result.report)
    _write_report(out, stem, "estimate", digest, result.report, elapsed)
    _summary("estimate", path, result.report, code)
    return code


def _run_formation(path, args):
    sc, digest = _load(path, args.seed)
    form = sc.formation_scenario()
    z0 = sc.z0
    dt, horizon, stride = _integrator_args(sc, args)
    t0 = time.perf_counter()
    try:
        result = run_formation(form, horizon, dt=dt, z0=z0,
                               record_every=stride, force=args.force,
                               rng=sc.seed)
    except InvalidInitialization as exc:
        print(f"[formation] {path}: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    elapsed = time.perf_counter() - t0

    stem = Path(path).stem
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    e_norms = w_norms = rot_dists = None
    if result.c_star is not None:
        from .formation import FormationState, formation_error
        e_norms, w_norms, rot_dists = [], [], []
        for s in range(len(result.times)):
            state = FormationState(result.positions[s],
                                   est.EstimatorState(result.aux[s]))
            e, w = formation_error(state, form, result.c_star)
            e_norms.append(np.linalg.norm(e, axis=1))
            w_norms.append(np.linalg.norm(w, axis=1))
            aligned = est.aligned_estimates(result.aux[s], form.orientations)
            rot_dists.append([rotation.rotation_distance(a, result.c_star)
                              for a in aligned])
    with open(out / f"{stem}_formation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "agent", "p_x", "p_y", "p_z",
                         "e_norm", "w_norm", "rot_dist"])
        for s, t in enumerate(result.times):
            for i in range(sc.n_agents):
                extra = (["nan"] * 3 if e_norms is None else
                         [f"{e_norms[s][i]:.12g}", f"{w_norms[s][i]:.12g}",
                          f"{rot_dists[s][i]:.12g}"])
                writer.writerow([f"{t:.6f}", i]
                                + [f"{v:.12g}" for v in result.positions[s, i]]
                                + extra)
    code = _verdict_exit(result.report)
    _write_report(out, stem, "formation", digest, result.report, elapsed)
    _summary("formation", path, result.report, code)
    return code


def _run_localize(path, args):
    sc, digest = _load(path, args.seed)
    loc = sc.localization_scenario()
    dt, horizon, stride = _integrator_args(sc, args)
    t0 = time.perf_counter()
    try:
        result = run_localization(loc, horizon, dt=dt, z0=sc.z0,
                                  record_every=stride, force=args.force,
                                  rng=sc.seed)
    except InvalidInitialization as exc:
        print(f"[localize] {path}: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    elapsed = time.perf_counter() - t0

    stem = Path(path).stem
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from .localization import pairwise_distance_error
    with open(out / f"{stem}_localize.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "agent", "phat_x", "phat_y", "phat_z",
                         "distance_error"])
        for s, t in enumerate(result.times):
            dist_err = pairwise_distance_error(result.estimates[s],
                                               loc.true_positions)
            for i in range(sc.n_agents):
                writer.writerow([f"{t:.6f}", i]
                                + [f"{v:.12g}" for v in result.estimates[s, i]]
                                + [f"{dist_err:.12g}"])
    code = _verdict_exit(result.report)
    _write_report(out, stem, "localize", digest, result.report, elapsed)
    _summary("localize", path, result.report, code)
    return code


def _run_circle(path, args):
    sc, digest = _load(path, args.seed)
    state0 = sc.oscillator_state()
    dt, horizon, stride = _integrator_args(sc, args, default_horizon=20.0)
    if args.perturb:
        rng = np.random.default_rng(sc.seed)
        state0 = OscillatorState(
            state0.theta + args.perturb * rng.standard_normal(len(state0.theta)))
    t0 = time.perf_counter()
    traj, report = run_circle(state0, sc.graph, horizon, dt=dt,
                              record_every=stride)
    elapsed = time.perf_counter() - t0

    stem = Path(path).stem
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{stem}_circle.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "agent", "theta"])
        for s, t in enumerate(traj.times):
            for i, th in enumerate(traj.states[s]):
                writer.writerow([f"{t:.6f}", i, f"{th:.12g}"])
    report = dict(report, converged=report["synchronized"])
    code = _verdict_exit(report)
    _write_report(out, stem, "circle", digest, report, elapsed)
    _summary("circle", path, report, code)
    return code


def _run_gen(args):
    raw = scenario.template_scenario(args.template, seed=args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.template}_seed{args.seed or 0}.json"
    scenario.write_scenario(raw, path)
    print(f"[gen] wrote {path}", file=sys.stderr)
    return EXIT_CONVERGED


_RUNNERS = {
    "estimate": _run_estimate,
    "formation": _run_formation,
    "localize": _run_localize,
    "circle": _run_circle,
}


def _run_one(command, path, args):
    try:
        return _RUNNERS[command](path, args)
    except (ParseError, SchemaError, InvariantViolation) as exc:
        print(f"[{command}] {path}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oriform",
        description="Distributed orientation estimation, formation control, "
                    "and network localization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", action="append", required=True,
                       metavar="PATH", help="scenario file (repeatable)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--force", action="store_true",
                       help="run despite an invalid initialization")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for multiple scenarios")
        p.add_argument("--record-every", type=int, default=None,
                       dest="record_every")
        if name == "circle":
            p.add_argument("--perturb", type=float, default=0.0,
                           help="std of a random perturbation of the "
                                "initial angles")
        return p

    add_run_command("estimate", "run orientation estimation only")
    add_run_command("formation", "run the formation-control cascade")
    add_run_command("localize", "run the network-localization cascade")
    add_run_command("circle", "run the unit-circle oscillator consensus")

    g = sub.add_parser("gen", help="generate a scenario file from a template")
    g.add_argument("template", choices=["fig3", "chain", "all2all-circle20"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return _run_gen(args)
    paths = args.scenario
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, [args.command] * len(paths), paths,
                                  [args] * len(paths)))
    else:
        codes = [_run_one(args.command, p, args) for p in paths]
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
