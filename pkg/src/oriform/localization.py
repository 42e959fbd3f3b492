"""Network localization from local displacement measurements and the
orientation estimator.

Each agent integrates a consensus law on its position estimate,
rotating the measured displacement back through its current
orientation estimate.  The error system is the formation error system
under the substitution (e -> p_tilde, w -> Psi); the estimates
converge to the true positions up to a common rotation (the transpose
of the formation's common rotation) and a common translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import estimator as est
from . import rotation
from .engine import IntegratorConfig, fit_log_slope, integrate
from .errors import InvalidInitialization, InvariantViolation
from .graph import DiGraph, has_rooted_out_branch

CONVERGENCE_TOL = 1e-4


@dataclass
class LocalizationScenario:
    g: DiGraph
    orientations: np.ndarray        # true C_i, (N, 3, 3)
    true_positions: np.ndarray      # ground truth for measurement synthesis
    initial_estimates: np.ndarray   # p_hat_i(0), (N, 3)
    k_u: float = 1.0
    edge_gains: dict = field(default_factory=dict)

    def __post_init__(self):
        N = self.g.n_vertices
        self.orientations = np.asarray(self.orientations, dtype=float)
        self.true_positions = np.asarray(self.true_positions, dtype=float)
        self.initial_estimates = np.asarray(self.initial_estimates, dtype=float)
        if self.orientations.shape != (N, 3, 3):
            raise InvariantViolation(f"need {N} 3x3 orientations")
        for i, C in enumerate(self.orientations):
            rotation.require_rotation(C, name=f"orientation of agent {i}")
        if self.true_positions.shape != (N, 3):
            raise InvariantViolation(f"need {N} true positions in R^3")
        if self.initial_estimates.shape != (N, 3):
            raise InvariantViolation(f"need {N} initial estimates in R^3")
        if self.k_u <= 0:
            raise InvariantViolation("gain k_u must be positive")
        edge_set = {(i, j) for i, j, _ in self.g.edges}
        for key, l in self.edge_gains.items():
            if tuple(key) not in edge_set:
                raise InvariantViolation(f"edge gain for non-edge {key}")
            if l <= 0:
                raise InvariantViolation(f"edge gain for {key} must be positive")

    def control_laplacian(self):
        N = self.g.n_vertices
        L = np.zeros((N, N))
        for i, j, _ in self.g.edges:
            l = float(self.edge_gains.get((i, j), 1.0))
            L[i, j] -= l
            L[i, i] += l
        return L


@dataclass
class LocalizationResult:
    times: np.ndarray
    estimates: np.ndarray           # (S, N, 3)
    aux: np.ndarray                 # (S, N, 2, 3)
    c_star: np.ndarray              # common rotation of the estimates
    report: dict


def localization_derivative(p_hat, scenario: LocalizationScenario,
                            estimator_state: est.EstimatorState):
    """Estimate update: consensus on estimates corrected by measured
    displacements rotated through the orientation estimate.

    Ground-truth positions enter only through the synthesized local
    measurement C_i (p_j - p_i); the law itself sees estimates and
    measurements only.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    p = scenario.true_positions
    C = scenario.orientations
    C_hat = est.assemble_all_3d(estimator_state.z)
    dp = np.zeros_like(p_hat)
    for i, j, _ in scenario.g.edges:
        l = float(scenario.edge_gains.get((i, j), 1.0))
        measured = C[i] @ (p[j] - p[i])
        dp[i] += l * (p_hat[j] - p_hat[i] - C_hat[i].T @ measured)
    return scenario.k_u * dp


def pairwise_distance_error(estimates, true_positions):
    """Largest over agent pairs of | ||p_hat_j - p_hat_i|| -
    ||p_j - p_i|| |."""
    p_hat = np.asarray(estimates, dtype=float)
    p = np.asarray(true_positions, dtype=float)
    d_hat = np.linalg.norm(p_hat[None, :, :] - p_hat[:, None, :], axis=2)
    d = np.linalg.norm(p[None, :, :] - p[:, None, :], axis=2)
    return float(np.abs(d_hat - d).max())


def run_localization(scenario: LocalizationScenario, horizon, dt=0.001,
                     z0: est.EstimatorState | None = None, record_every=100,
                     force=False, pre_converged=False, rng=None):
    """Integrate the estimator/localization cascade and report the
    final pairwise distance error.

    Mirrors run_formation, including the initialization refusal and the
    pre-converged mode.  The common rotation of the position estimates
    is the transpose of the orientation oracle's prediction, because
    the law applies the estimate inverse to the measurements.
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
    k_u = scenario.k_u
    C = scenario.orientations
    p_true = scenario.true_positions

    x_star = None
    if ok_init:
        _, x_star = est.steady_state_oracle(scenario.g, scenario.orientations, z0)
    c_star = None if x_star is None else x_star.T

    frozen_S = None
    if pre_converged:
        if c_star is None:
            raise InvalidInitialization("cannot pre-converge a degenerate run")
        frozen_S = np.broadcast_to(c_star, (N, 3, 3))
        z0 = est.EstimatorState(
            np.stack([(C[i] @ x_star)[:, :2].T for i in range(N)])
        )

    dtrue = Ll @ p_true
    Ht = np.ascontiguousarray(H.T)
    # (N, 3) rows C_i (Ll p)_i, so S_i dtrue_i = C_hat_i^T (that row).
    rotated_true = np.einsum("imn,in->im", C, dtrue)[:, :, None]

    # Hot loop mirrors the formation derivative: unchecked estimate
    # assembly, divergence guarded by the integrator.
    def deriv(_t, y):
        z = y[: 6 * N].reshape(N, 2, 3)
        p_hat = y[6 * N :].reshape(N, 3)
        out = np.empty_like(y)
        dz = z.transpose(1, 0, 2).reshape(2, 3 * N) @ Ht
        out[: 6 * N] = dz.reshape(2, N, 3).transpose(1, 0, 2).reshape(-1)
        if frozen_S is None:
            z1 = z[:, 0, :]
            z2 = z[:, 1, :]
            b1 = z1 / np.linalg.norm(z1, axis=1, keepdims=True)
            v2 = z2 - np.sum(z2 * b1, axis=1, keepdims=True) * b1
            b2 = v2 / np.linalg.norm(v2, axis=1, keepdims=True)
            C_hat = np.stack((b1, b2, np.cross(b1, b2)), axis=2)
            correction = (C_hat.transpose(0, 2, 1) @ rotated_true)[:, :, 0]
        else:
            correction = (frozen_S @ dtrue[:, :, None])[:, :, 0]
        dp = k_u * (correction - Ll @ p_hat)
        out[6 * N :] = dp.reshape(-1)
        return out

    y0 = np.concatenate([z0.z.ravel(), scenario.initial_estimates.ravel()])
    config = IntegratorConfig(dt=dt, horizon=horizon, record_every=record_every)
    traj = integrate(deriv, y0, config)

    aux = traj.states[:, : 6 * N].reshape(-1, N, 2, 3)
    estimates = traj.states[:, 6 * N :].reshape(-1, N, 3)

    report = {"valid_initialization": bool(ok_init)}
    if c_star is not None:
        final_err = pairwise_distance_error(estimates[-1], p_true)
        tilde_final = estimates[-1] - p_true @ c_star.T
        t_inf = tilde_final.mean(axis=0)
        tilde = estimates - p_true @ c_star.T - t_inf
        error_norms = np.linalg.norm(tilde.reshape(len(traj.times), -1), axis=1)
        report.update(
            final_distance_error=final_err,
            converged=bool(final_err < CONVERGENCE_TOL),
            t_inf=t_inf,
            error_norms=error_norms,
            decay_rate=fit_log_slope(traj.times, error_norms, t_min=5.0),
        )
    else:
        report.update(final_distance_error=float("nan"), converged=False,
                      error_norms=None, decay_rate=None)
    return LocalizationResult(traj.times, estimates, aux, c_star, report)
