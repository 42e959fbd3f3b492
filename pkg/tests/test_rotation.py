import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oriform.errors import DegenerateInput, DimensionMismatch, InvariantViolation
from oriform.rotation import (
    axis_angle_matrix,
    complete_rotation,
    gram_schmidt,
    is_rotation,
    random_rotation,
    relative_orientation,
    require_rotation,
    rotation_distance,
)

E = np.eye(3)


def random_orthonormal(n, rng):
    return random_rotation(n, rng)[:, : n - 1].T


class TestGramSchmidt:
    def test_already_orthonormal(self):
        out = gram_schmidt([E[0], E[1]])
        assert np.allclose(out, [E[0], E[1]], atol=1e-15)

    def test_scaling_and_shear_removed(self):
        out = gram_schmidt([2 * E[0], 3 * E[0] + 5 * E[1]])
        assert np.allclose(out, [E[0], E[1]], atol=1e-15)

    def test_dependent_input_raises(self):
        with pytest.raises(DegenerateInput):
            gram_schmidt([E[0], 2 * E[0]])

    def test_near_dependent_input_raises(self):
        with pytest.raises(DegenerateInput):
            gram_schmidt([E[0], E[0] + 1e-12 * E[1]])

    def test_zero_input_raises(self):
        with pytest.raises(DegenerateInput):
            gram_schmidt(np.zeros((2, 3)))

    def test_wrong_count_raises(self):
        with pytest.raises(DimensionMismatch):
            gram_schmidt(np.ones((3, 3)))

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_output_orthonormal(self, seed, n):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n - 1, n))
        b = gram_schmidt(z)
        assert np.abs(b @ b.T - np.eye(n - 1)).max() < 1e-12

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_first_vector_normalized_only(self, seed):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((2, 3))
        b = gram_schmidt(z)
        assert np.allclose(b[0], z[0] / np.linalg.norm(z[0]), atol=1e-14)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_projective_idempotence(self, seed):
        rng = np.random.default_rng(seed)
        b = gram_schmidt(rng.standard_normal((3, 4)))
        assert np.abs(gram_schmidt(b) - b).max() < 1e-12

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_rotation_equivariance(self, seed, n):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n - 1, n))
        R = random_rotation(n, rng)
        rotated = gram_schmidt(z @ R.T)
        plain = gram_schmidt(z) @ R.T
        assert np.abs(rotated - plain).max() < 1e-10


class TestCompleteRotation:
    def test_standard_frame(self):
        B = complete_rotation([E[0], E[1]])
        assert np.allclose(B[:, 2], E[2], atol=1e-15)

    def test_swapped_frame_flips_sign(self):
        B = complete_rotation([E[1], E[0]])
        assert np.allclose(B[:, 2], -E[2], atol=1e-15)

    def test_four_dimensional(self):
        B = complete_rotation(np.eye(4)[:3])
        assert np.allclose(B[:, 3], np.eye(4)[3], atol=1e-14)
        assert np.linalg.det(B) == pytest.approx(1.0, abs=1e-12)

    def test_cross_product_convention(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            b = random_orthonormal(3, rng)
            B = complete_rotation(b)
            assert np.allclose(B[:, 2], np.cross(b[0], b[1]), atol=1e-15)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvariantViolation):
            complete_rotation([E[0], E[0] + E[1]])

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 5))
    @settings(max_examples=80, deadline=None)
    def test_output_is_rotation(self, seed, n):
        rng = np.random.default_rng(seed)
        B = complete_rotation(random_orthonormal(n, rng))
        assert is_rotation(B)

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 5))
    @settings(max_examples=40, deadline=None)
    def test_equivariance_under_proper_rotation(self, seed, n):
        rng = np.random.default_rng(seed)
        b = random_orthonormal(n, rng)
        R = random_rotation(n, rng)
        direct = complete_rotation(b @ R.T)[:, -1]
        mapped = R @ complete_rotation(b)[:, -1]
        assert np.abs(direct - mapped).max() < 1e-12


class TestRelativeOrientation:
    def test_identity_pair(self):
        assert np.allclose(relative_orientation(E, E), E)

    def test_identity_reference(self):
        C = random_rotation(3, 5)
        assert np.allclose(relative_orientation(C, E), C)

    def test_reassembles(self):
        rng = np.random.default_rng(6)
        C_i, C_j = random_rotation(3, rng), random_rotation(3, rng)
        C_ji = relative_orientation(C_j, C_i)
        assert np.abs(C_ji @ C_i - C_j).max() < 1e-12

    def test_self_relative_is_identity(self):
        C = random_rotation(4, 8)
        assert np.allclose(relative_orientation(C, C), np.eye(4), atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            relative_orientation(np.eye(3), np.eye(4))


class TestRotationDistance:
    def test_zero_for_equal(self):
        assert rotation_distance(E, E) == 0.0

    def test_two_flipped_axes(self):
        assert rotation_distance(E, np.diag([-1.0, -1.0, 1.0])) == \
            pytest.approx(2.0 * np.sqrt(2.0))

    def test_small_angle_first_order(self):
        theta = 1e-3
        A = random_rotation(3, 17)
        B = A @ axis_angle_matrix([0.0, 0.0, 1.0], theta)
        assert rotation_distance(A, B) == pytest.approx(theta * np.sqrt(2.0),
                                                        rel=1e-5)


class TestRandomRotation:
    def test_satisfies_invariants(self):
        for seed in range(20):
            require_rotation(random_rotation(3, seed))
            require_rotation(random_rotation(5, seed))

    def test_deterministic_per_seed(self):
        assert np.array_equal(random_rotation(3, 123), random_rotation(3, 123))

    def test_haar_mean_trace(self):
        rng = np.random.default_rng(2024)
        traces = [np.trace(random_rotation(3, rng)) for _ in range(1000)]
        assert abs(np.mean(traces)) < 0.15


def test_require_rotation_rejects_reflection():
    with pytest.raises(InvariantViolation):
        require_rotation(np.diag([1.0, 1.0, -1.0]))


def test_axis_angle_matrix_quarter_turn():
    R = axis_angle_matrix([0.0, 0.0, 1.0], np.pi / 2)
    assert np.allclose(R @ E[0], E[1], atol=1e-15)
