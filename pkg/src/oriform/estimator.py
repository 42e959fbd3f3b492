"""Distributed orientation estimation via consensus on auxiliary
variables.

Each agent carries n-1 auxiliary vectors in R^n that evolve by a
relative-orientation-weighted consensus law; Gram-Schmidt plus
pseudovector completion turns them into the agent's orientation
estimate.  A spectral oracle predicts the common limit from the
Laplacian's left null vector, for use by tests and reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rotation
from .engine import IntegratorConfig, fit_log_slope, integrate
from .errors import (
    DegenerateInput,
    DegenerateLimit,
    InconsistentRelativeOrientation,
    InvalidInitialization,
    InvariantViolation,
    MissingEdgeMeasurement,
)
from .graph import DiGraph, has_rooted_out_branch, laplacian, zero_eigen_left_vector

# Numerical margin for the exact-arithmetic initialization condition.
EPS_INIT = 1e-6


@dataclass
class EstimatorState:
    """Auxiliary variables of all agents: z[i, k] is slot k of agent i."""

    z: np.ndarray  # (N, n-1, n)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if self.z.ndim != 3 or self.z.shape[1] != self.z.shape[2] - 1:
            raise InvariantViolation(
                f"auxiliary array must have shape (N, n-1, n), got {self.z.shape}"
            )
        if not np.all(np.isfinite(self.z)):
            raise InvariantViolation("auxiliary variables must be finite")

    @property
    def n_agents(self):
        return self.z.shape[0]

    @property
    def dimension(self):
        return self.z.shape[2]

    @classmethod
    def random(cls, n_agents, dimension, rng):
        rng = np.random.default_rng(rng)
        return cls(rng.standard_normal((n_agents, dimension - 1, dimension)))


def relative_measurements(g: DiGraph, orientations):
    """Synthesize the per-edge measurements C_ji = C_j C_i^T from true
    orientations; keyed by sensing edge (i, j)."""
    return {
        (i, j): rotation.relative_orientation(orientations[j], orientations[i])
        for i, j, _ in g.edges
    }


def build_H(g: DiGraph, relative_orientations, n):
    """Assemble the (nN x nN) generator of the stacked auxiliary
    dynamics.

    Block (i, j) is a_ij C_ij for j in N_i (C_ij is the transpose of the
    measured C_ji), the negated weight sum times identity on the
    diagonal, and zero elsewhere.  Checks that measurements exist for
    every edge and that bidirectional pairs are mutual transposes.
    """
    N = g.n_vertices
    H = np.zeros((n * N, n * N))
    for i, j, w in g.edges:
        if (i, j) not in relative_orientations:
            raise MissingEdgeMeasurement(f"no measurement for edge ({i},{j})")
        C_ji = np.asarray(relative_orientations[(i, j)], dtype=float)
        if C_ji.shape != (n, n):
            raise InvariantViolation(f"measurement on edge ({i},{j}) is not {n}x{n}")
        if (j, i) in relative_orientations:
            back = np.asarray(relative_orientations[(j, i)], dtype=float)
            if np.linalg.norm(C_ji - back.T) > 1e-8:
                raise InconsistentRelativeOrientation(
                    f"measurements on edges ({i},{j}) and ({j},{i}) "
                    "are not mutual transposes"
                )
        H[i * n : (i + 1) * n, j * n : (j + 1) * n] = w * C_ji.T
        H[i * n : (i + 1) * n, i * n : (i + 1) * n] -= w * np.eye(n)
    return H


def estimator_derivative(state: EstimatorState, g: DiGraph, relative_orientations):
    """Per-agent consensus update: slot k of agent i moves toward the
    neighbor values rotated into agent i's frame."""
    z = state.z
    dz = np.zeros_like(z)
    for i, j, w in g.edges:
        if (i, j) not in relative_orientations:
            raise MissingEdgeMeasurement(f"no measurement for edge ({i},{j})")
        C_ij = np.asarray(relative_orientations[(i, j)]).T
        dz[i] += w * (z[j] @ C_ij.T - z[i])
    return dz


def assemble_estimate(state: EstimatorState, agent):
    """Orientation estimate of one agent from its auxiliary slots."""
    return rotation.complete_rotation(rotation.gram_schmidt(state.z[agent]))


def assemble_all_3d(z):
    """Vectorized 3-D estimate assembly for all agents at once.

    ``z`` has shape (N, 2, 3); returns (N, 3, 3) rotations with columns
    (b1, b2, b1 x b2).  Raises DegenerateInput if any agent's slots are
    (near-)dependent.
    """
    z1, z2 = z[:, 0, :], z[:, 1, :]
    scale = np.abs(z).max(axis=(1, 2))
    if (scale == 0.0).any():
        raise DegenerateInput("agent with all-zero auxiliary variables")
    delta = rotation.GS_DEGENERACY_TOL * scale
    n1 = np.linalg.norm(z1, axis=1)
    if (n1 < delta).any():
        raise DegenerateInput("first auxiliary slot collapsed")
    b1 = z1 / n1[:, None]
    v2 = z2 - np.sum(z2 * b1, axis=1)[:, None] * b1
    n2 = np.linalg.norm(v2, axis=1)
    if (n2 < delta).any():
        raise DegenerateInput("second auxiliary slot dependent on the first")
    b2 = v2 / n2[:, None]
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=2)


def _limits(g: DiGraph, true_orientations, z0: EstimatorState):
    """Projected consensus limits q_k^inf of the frame-aligned
    variables, one n-vector per slot."""
    w = zero_eigen_left_vector(laplacian(g))
    C = np.asarray(true_orientations, dtype=float)
    # q_{i,k}(0) = C_i^T z_{i,k}(0)
    q0 = np.einsum("imn,ikm->ikn", C, z0.z)
    q_inf = np.einsum("i,ikn->kn", w, q0)
    return q0, q_inf


def steady_state_oracle(g: DiGraph, true_orientations, z0: EstimatorState):
    """Predict the common rotation the estimates converge to.

    Projects the initial frame-aligned variables onto the Laplacian's
    left null vector and runs the Gram-Schmidt completion on the
    limits.  Returns (per-slot limits, predicted common rotation).
    Raises DegenerateLimit when the projection kills or degenerates the
    limits (the initialization failure set).
    """
    q0, q_inf = _limits(g, true_orientations, z0)
    scale = np.linalg.norm(q0)
    if np.any(np.linalg.norm(q_inf, axis=1) <= EPS_INIT * max(scale, 1e-300)):
        raise DegenerateLimit("a projected limit vector vanishes")
    try:
        c_star = rotation.complete_rotation(rotation.gram_schmidt(q_inf))
    except DegenerateInput as exc:
        raise DegenerateLimit(f"projected limits are dependent: {exc}") from exc
    return q_inf, c_star


def check_initialization(g: DiGraph, true_orientations, z0: EstimatorState) -> bool:
    """Decidable form of the convergence condition: every slot's
    projection onto the left null vector is nonvanishing and the
    projected limits are linearly independent."""
    q0, q_inf = _limits(g, true_orientations, z0)
    for k in range(q0.shape[1]):
        norm0 = np.linalg.norm(q0[:, k, :])
        if norm0 == 0.0 or np.linalg.norm(q_inf[k]) <= EPS_INIT * norm0:
            return False
    sing = np.linalg.svd(q_inf, compute_uv=False)
    return bool(sing[-1] > EPS_INIT * sing[0])


def aligned_estimates(z, true_orientations):
    """Frame-aligned estimates C_i^T C_hat_i for every agent; these all
    converge to the oracle's common rotation."""
    C = np.asarray(true_orientations, dtype=float)
    N, _, n = z.shape
    out = np.empty((N, n, n))
    for i in range(N):
        b = rotation.complete_rotation(rotation.gram_schmidt(z[i]))
        out[i] = C[i].T @ b
    return out


def max_pairwise_disagreement(q):
    """Largest pairwise distance between agents' frame-aligned
    auxiliary variables (stacked over slots)."""
    flat = q.reshape(q.shape[0], -1)
    diffs = flat[None, :, :] - flat[:, None, :]
    return float(np.linalg.norm(diffs, axis=2).max())


@dataclass
class EstimationResult:
    times: np.ndarray
    aux: np.ndarray             # (S, N, n-1, n)
    c_star: np.ndarray | None
    report: dict


def run_estimation(g: DiGraph, true_orientations, z0: EstimatorState,
                   horizon, dt=0.001, record_every=100, force=False):
    """Integrate the auxiliary-variable consensus and report estimate
    agreement.

    The report carries the final pairwise distance between the agents'
    frame-aligned estimates, the worst per-edge violation of the
    relative-orientation relation, the distance of each estimate to the
    spectral oracle's prediction, and a fitted consensus decay rate.
    """
    if not has_rooted_out_branch(g):
        if not force:
            raise InvalidInitialization("graph has no rooted-out branch")
        ok_init = False
    else:
        ok_init = check_initialization(g, true_orientations, z0)
        if not ok_init and not force:
            raise InvalidInitialization(
                "auxiliary initialization violates the convergence condition"
            )
    N, slots, n = z0.z.shape
    measurements = relative_measurements(g, true_orientations)
    H = build_H(g, measurements, n)
    c_star = None
    if ok_init:
        _, c_star = steady_state_oracle(g, true_orientations, z0)

    def deriv(_t, y):
        z = y.reshape(N, slots, n)
        dz = (H @ z.transpose(1, 0, 2).reshape(slots, n * N).T).T
        return dz.reshape(slots, N, n).transpose(1, 0, 2).ravel()

    config = IntegratorConfig(dt=dt, horizon=horizon, record_every=record_every)
    traj = integrate(deriv, z0.z.ravel(), config)
    aux = traj.states.reshape(-1, N, slots, n)

    C = np.asarray(true_orientations, dtype=float)
    q = np.einsum("imn,sikm->sikn", C, aux)
    disagreement = np.array([max_pairwise_disagreement(qs) for qs in q])
    report = {
        "valid_initialization": bool(ok_init),
        "initial_norm": float(np.linalg.norm(aux[0])),
        "final_norm": float(np.linalg.norm(aux[-1])),
        "disagreement": disagreement,
        "decay_rate": fit_log_slope(traj.times, disagreement, t_min=2.0,
                                    floor=1e-11),
    }
    try:
        aligned = aligned_estimates(aux[-1], C)
        pairwise = max(
            rotation.rotation_distance(aligned[i], aligned[j])
            for i in range(N) for j in range(i + 1, N)
        ) if N > 1 else 0.0
        b_final = np.einsum("imn,ink->imk", C, aligned)  # C_hat_i at horizon
        relation = 0.0
        for i, j, _ in g.edges:
            C_ji = measurements[(i, j)]
            relation = max(relation,
                           float(np.linalg.norm(b_final[j] - C_ji @ b_final[i])))
        report.update(
            final_pairwise_distance=pairwise,
            final_relation_error=relation,
            oracle_distance=(
                max(rotation.rotation_distance(a, c_star) for a in aligned)
                if c_star is not None else float("nan")),
            converged=bool(pairwise < 1e-6 and ok_init),
        )
    except DegenerateInput:
        report.update(final_pairwise_distance=float("nan"),
                      final_relation_error=float("nan"),
                      oracle_distance=float("nan"), converged=False,
                      degenerate_readout=True)
    return EstimationResult(traj.times, aux, c_star, report)
