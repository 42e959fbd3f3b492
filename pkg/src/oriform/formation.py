"""3-D formation control driven by the online orientation estimate.

Positions follow a displacement-consensus law in which each agent
rotates the desired displacements through its current orientation
estimate; the estimator runs simultaneously as a one-directional
cascade.  The achieved formation equals the desired one up to the
common rotation predicted by the spectral oracle and a common
translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import estimator as est
from . import rotation
from .engine import IntegratorConfig, fit_log_slope, integrate
from .errors import InvalidInitialization, InvariantViolation
from .graph import DiGraph, has_rooted_out_branch, laplacian

CONVERGENCE_TOL = 1e-4


@dataclass
class FormationScenario:
    g: DiGraph
    orientations: np.ndarray        # true C_i, (N, 3, 3)
    initial_positions: np.ndarray   # p_i(0) in the global frame, (N, 3)
    desired_formation: np.ndarray   # p_i^*, (N, 3)
    k_u: float = 1.0
    edge_gains: dict = field(default_factory=dict)  # (i, j) -> l_ij, default 1

    def __post_init__(self):
        N = self.g.n_vertices
        self.orientations = np.asarray(self.orientations, dtype=float)
        self.initial_positions = np.asarray(self.initial_positions, dtype=float)
        self.desired_formation = np.asarray(self.desired_formation, dtype=float)
        if self.orientations.shape != (N, 3, 3):
            raise InvariantViolation(f"need {N} 3x3 orientations")
        for i, C in enumerate(self.orientations):
            rotation.require_rotation(C, name=f"orientation of agent {i}")
        if self.initial_positions.shape != (N, 3):
            raise InvariantViolation(f"need {N} initial positions in R^3")
        if self.desired_formation.shape != (N, 3):
            raise InvariantViolation(f"need {N} desired positions in R^3")
        if self.k_u <= 0:
            raise InvariantViolation("control gain k_u must be positive")
        edge_set = {(i, j) for i, j, _ in self.g.edges}
        for key, l in self.edge_gains.items():
            if tuple(key) not in edge_set:
                raise InvariantViolation(f"edge gain for non-edge {key}")
            if l <= 0:
                raise InvariantViolation(f"edge gain for {key} must be positive")

    def control_laplacian(self):
        """Laplacian built from the edge gains l_ij (default 1 per edge)."""
        N = self.g.n_vertices
        L = np.zeros((N, N))
        for i, j, _ in self.g.edges:
            l = float(self.edge_gains.get((i, j), 1.0))
            L[i, j] -= l
            L[i, i] += l
        return L


@dataclass
class FormationState:
    positions: np.ndarray       # (N, 3)
    est: est.EstimatorState


@dataclass
class FormationResult:
    times: np.ndarray
    positions: np.ndarray       # (S, N, 3)
    aux: np.ndarray             # (S, N, 2, 3)
    c_star: np.ndarray
    report: dict


def relative_position_measurement(positions, C_i, i, j):
    """Displacement of agent j seen in agent i's local frame."""
    p = np.asarray(positions, dtype=float)
    return np.asarray(C_i, dtype=float) @ (p[j] - p[i])


def control_input(state: FormationState, scenario: FormationScenario, i):
    """Local-frame velocity command of agent i: gains times measured
    minus estimated-desired displacements."""
    C_i = scenario.orientations[i]
    C_hat = est.assemble_estimate(state.est, i)
    p = state.positions
    p_star = scenario.desired_formation
    u = np.zeros(3)
    for j, _ in scenario.g.neighbors(i):
        l = float(scenario.edge_gains.get((i, j), 1.0))
        measured = relative_position_measurement(p, C_i, i, j)
        u += l * (measured - C_hat @ (p_star[j] - p_star[i]))
    return scenario.k_u * u


def formation_error(state: FormationState, scenario: FormationScenario, c_star):
    """Per-agent error e_i = p_i - C* p_i^* and estimator-induced
    disturbance w_i."""
    c_star = np.asarray(c_star, dtype=float)
    e = state.positions - scenario.desired_formation @ c_star.T
    C = scenario.orientations
    C_hat = est.assemble_all_3d(state.est.z)
    R = np.einsum("imn,imk->ink", C, C_hat)  # C_i^T C_hat_i
    Ll = scenario.control_laplacian()
    dstar = Ll @ scenario.desired_formation  # row i: sum_j l_ij (p_i^* - p_j^*)
    w = -scenario.k_u * np.einsum("imn,in->im", c_star[None] - R, dstar)
    return e, w


def _stacked_derivative(scenario, H, Ll, frozen_R=None):
    """Time derivative of the packed (aux, positions) state.

    ``frozen_R`` freezes every agent's frame-aligned estimate C_i^T
    C_hat_i at a fixed rotation (pre-converged cascade), which makes
    the closed loop exactly linear consensus on the error.
    """
    N = scenario.g.n_vertices
    k_u = scenario.k_u
    Ct = np.ascontiguousarray(scenario.orientations.transpose(0, 2, 1))
    dstar = (Ll @ scenario.desired_formation)[:, :, None]
    Ht = np.ascontiguousarray(H.T)

    # Hot loop: no degeneracy checks here.  A collapsing estimate blows
    # up the normalization and trips the integrator's divergence guard.
    def deriv(_t, y):
        z = y[: 6 * N].reshape(N, 2, 3)
        p = y[6 * N :].reshape(N, 3)
        out = np.empty_like(y)
        dz = z.transpose(1, 0, 2).reshape(2, 3 * N) @ Ht
        out[: 6 * N] = dz.reshape(2, N, 3).transpose(1, 0, 2).reshape(-1)
        if frozen_R is None:
            z1 = z[:, 0, :]
            z2 = z[:, 1, :]
            b1 = z1 / np.linalg.norm(z1, axis=1, keepdims=True)
            v2 = z2 - np.sum(z2 * b1, axis=1, keepdims=True) * b1
            b2 = v2 / np.linalg.norm(v2, axis=1, keepdims=True)
            C_hat = np.stack((b1, b2, np.cross(b1, b2)), axis=2)
            R = Ct @ C_hat
        else:
            R = frozen_R
        dp = k_u * ((R @ dstar)[:, :, 0] - Ll @ p)
        out[6 * N :] = dp.reshape(-1)
        return out

    return deriv


def max_edge_displacement_error(positions, scenario, c_star):
    """Largest over edges of || (p_j - p_i) - C* (p_j^* - p_i^*) ||."""
    p = np.asarray(positions, dtype=float)
    p_star = scenario.desired_formation
    worst = 0.0
    for i, j, _ in scenario.g.edges:
        err = (p[j] - p[i]) - c_star @ (p_star[j] - p_star[i])
        worst = max(worst, float(np.linalg.norm(err)))
    return worst


def run_formation(scenario: FormationScenario, horizon, dt=0.001,
                  z0: est.EstimatorState | None = None, record_every=100,
                  force=False, pre_converged=False, rng=None):
    """Integrate the estimator/control cascade and report convergence.

    ``z0`` defaults to a seeded random initialization.  Refuses to run
    (InvalidInitialization) when the auxiliary initialization violates
    the convergence condition, unless ``force`` is set.  With
    ``pre_converged`` the estimates are frozen at their predicted
    limit, reducing the loop to linear consensus on the error.
    """
    N = scenario.g.n_vertices
    if z0 is None:
        z0 = est.EstimatorState.random(N, 3, np.random.default_rng(rng))
    if not has_rooted_out_branch(scenario.g):
        if not force:
            raise InvalidInitialization("graph has no rooted-out branch")
        ok_init = False
    else:
        ok_init = est.check_initialization(scenario.g, scenario.orientations, z0)
        if not ok_init and not force:
            raise InvalidInitialization(
                "auxiliary initialization violates the convergence condition"
            )
    measurements = est.relative_measurements(scenario.g, scenario.orientations)
    H = est.build_H(scenario.g, measurements, 3)
    Ll = scenario.control_laplacian()
    c_star = None
    if ok_init:
        _, c_star = est.steady_state_oracle(scenario.g, scenario.orientations, z0)
    frozen_R = None
    if pre_converged:
        if c_star is None:
            raise InvalidInitialization("cannot pre-converge a degenerate run")
        frozen_R = np.broadcast_to(c_star, (N, 3, 3))
        # Evolve the aux variables from their limit so the readout stays
        # consistent with the frozen estimate.
        z0 = est.EstimatorState(
            np.stack([(scenario.orientations[i] @ c_star)[:, :2].T
                      for i in range(N)])
        )

    y0 = np.concatenate([z0.z.ravel(), scenario.initial_positions.ravel()])
    config = IntegratorConfig(dt=dt, horizon=horizon, record_every=record_every)
    deriv = _stacked_derivative(scenario, H, Ll, frozen_R=frozen_R)
    traj = integrate(deriv, y0, config)

    aux = traj.states[:, : 6 * N].reshape(-1, N, 2, 3)
    positions = traj.states[:, 6 * N :].reshape(-1, N, 3)

    report = {"valid_initialization": bool(ok_init)}
    if c_star is not None:
        final_err = max_edge_displacement_error(positions[-1], scenario, c_star)
        # Consensus offset measured from the trajectory tail.
        e_final = positions[-1] - scenario.desired_formation @ c_star.T
        p_inf = e_final.mean(axis=0)
        e_all = positions - scenario.desired_formation @ c_star.T - p_inf
        error_norms = np.linalg.norm(e_all.reshape(len(traj.times), -1), axis=1)
        report.update(
            final_edge_error=final_err,
            converged=bool(final_err < CONVERGENCE_TOL),
            p_inf=p_inf,
            error_norms=error_norms,
            decay_rate=fit_log_slope(traj.times, error_norms, t_min=5.0),
        )
    else:
        report.update(final_edge_error=float("nan"), converged=False,
                      error_norms=None, decay_rate=None)
    return FormationResult(traj.times, positions, aux, c_star, report)
