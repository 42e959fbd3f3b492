"""Deterministic fixed-step ODE integration and trajectory recording."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, NonFiniteState

# Any state component beyond this magnitude aborts the run.
DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.001
    horizon: float = 1.0
    method: str = "rk4"
    record_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise InvariantViolation("dt must be positive")
        if self.horizon < self.dt:
            raise InvariantViolation("horizon must be at least one step")
        if self.method not in ("rk4", "euler"):
            raise InvariantViolation(f"unknown method {self.method!r}")
        if self.record_every < 1:
            raise InvariantViolation("record_every must be a positive integer")

    @property
    def n_steps(self):
        return int(round(self.horizon / self.dt))


@dataclass
class Trajectory:
    """Uniformly strided record of an integration run."""

    times: np.ndarray
    states: np.ndarray  # (n_samples, state_dim)

    def final_state(self):
        return self.states[-1]

    def __len__(self):
        return len(self.times)


def integrate(derivative, state0, config: IntegratorConfig) -> Trajectory:
    """Fixed-step integration of ``y' = derivative(t, y)``.

    Classical 4th-order Runge-Kutta by default, forward Euler on
    request.  Deterministic for fixed inputs.  Raises NonFiniteState if
    the state leaves the finite range.
    """
    y = np.asarray(state0, dtype=float).copy()
    dt = config.dt
    n_steps = config.n_steps
    stride = config.record_every
    rk4 = config.method == "rk4"

    times = [0.0]
    states = [y.copy()]
    t = 0.0
    for step in range(1, n_steps + 1):
        if rk4:
            k1 = derivative(t, y)
            k2 = derivative(t + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = derivative(t + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = derivative(t + dt, y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            y = y + dt * derivative(t, y)
        t = step * dt
        if not np.all(np.isfinite(y)) or np.abs(y).max() > DIVERGENCE_GUARD:
            raise NonFiniteState(f"state diverged at t={t:.6g}")
        if step % stride == 0 or step == n_steps:
            times.append(t)
            states.append(y.copy())
    return Trajectory(np.asarray(times), np.asarray(states))


def fit_log_slope(times, values, t_min=0.0, floor=1e-13):
    """Least-squares slope of log(values) against time, over samples
    after ``t_min`` whose value exceeds ``floor``.

    Used to extract empirical exponential decay rates; returns the
    slope (negative for decay) or None if fewer than two usable
    samples remain.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (times >= t_min) & (values > floor)
    if mask.sum() < 2:
        return None
    t = times[mask]
    logv = np.log(values[mask])
    slope = np.polyfit(t, logv, 1)[0]
    return float(slope)
