import numpy as np
import pytest
from scipy.linalg import expm

from oriform.engine import IntegratorConfig, fit_log_slope, integrate
from oriform.errors import InvariantViolation, NonFiniteState


class TestConfig:
    def test_rejects_bad_dt(self):
        with pytest.raises(InvariantViolation):
            IntegratorConfig(dt=0.0, horizon=1.0)

    def test_rejects_short_horizon(self):
        with pytest.raises(InvariantViolation):
            IntegratorConfig(dt=0.1, horizon=0.05)

    def test_rejects_unknown_method(self):
        with pytest.raises(InvariantViolation):
            IntegratorConfig(horizon=1.0, method="rk45")

    def test_rejects_bad_stride(self):
        with pytest.raises(InvariantViolation):
            IntegratorConfig(horizon=1.0, record_every=0)


class TestIntegrate:
    def test_constant_for_zero_derivative(self):
        traj = integrate(lambda t, y: np.zeros_like(y), np.array([1.0, -2.0]),
                         IntegratorConfig(dt=0.01, horizon=1.0))
        assert np.all(traj.states == [1.0, -2.0])

    def test_exponential_decay(self):
        traj = integrate(lambda t, y: -y, np.array([1.0]),
                         IntegratorConfig(dt=0.001, horizon=1.0))
        assert abs(traj.final_state()[0] - np.exp(-1.0)) < 1e-10

    def test_linear_system_matches_matrix_exponential(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            A = rng.standard_normal((4, 4))
            A *= 5.0 / np.linalg.norm(A, 2)
            x0 = rng.standard_normal(4)
            traj = integrate(lambda t, y: A @ y, x0,
                             IntegratorConfig(dt=0.001, horizon=1.0))
            expected = expm(A) @ x0
            assert np.abs(traj.final_state() - expected).max() < 1e-8

    def test_euler_first_order(self):
        traj = integrate(lambda t, y: -y, np.array([1.0]),
                         IntegratorConfig(dt=0.0001, horizon=1.0,
                                          method="euler"))
        assert abs(traj.final_state()[0] - np.exp(-1.0)) < 1e-4

    def test_divergence_guard(self):
        with pytest.raises(NonFiniteState):
            integrate(lambda t, y: y ** 2, np.array([10.0]),
                      IntegratorConfig(dt=0.01, horizon=5.0))

    def test_deterministic(self):
        def deriv(t, y):
            return np.sin(y) - 0.3 * y

        a = integrate(deriv, np.array([0.7, -1.1]),
                      IntegratorConfig(dt=0.01, horizon=2.0))
        b = integrate(deriv, np.array([0.7, -1.1]),
                      IntegratorConfig(dt=0.01, horizon=2.0))
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.times, b.times)

    def test_step_halving_fourth_order(self):
        A = np.array([[0.0, 1.0], [-4.0, -0.5]])
        x0 = np.array([1.0, 0.0])
        coarse = integrate(lambda t, y: A @ y, x0,
                           IntegratorConfig(dt=0.002, horizon=1.0))
        fine = integrate(lambda t, y: A @ y, x0,
                         IntegratorConfig(dt=0.001, horizon=1.0))
        assert np.abs(coarse.final_state() - fine.final_state()).max() < 1e-8

    def test_recording_stride(self):
        traj = integrate(lambda t, y: -y, np.array([1.0]),
                         IntegratorConfig(dt=0.01, horizon=1.0,
                                          record_every=10))
        assert len(traj) == 11
        assert np.allclose(np.diff(traj.times), 0.1)


def test_fit_log_slope_recovers_rate():
    t = np.linspace(0.0, 10.0, 200)
    v = 3.0 * np.exp(-0.7 * t)
    assert fit_log_slope(t, v, t_min=1.0) == pytest.approx(-0.7, rel=1e-10)


def test_fit_log_slope_insufficient_data():
    assert fit_log_slope([0.0, 1.0], [1e-20, 1e-20]) is None
