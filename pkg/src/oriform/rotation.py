"""SO(n) utilities: validation, Gram-Schmidt, pseudovector completion,
relative-orientation algebra.

Rotations are plain ``(n, n)`` ndarrays; ``require_rotation`` enforces
the group invariants at construction boundaries (scenario loading,
random sampling), after which operations assume them.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import special_ortho_group

from .errors import DegenerateInput, DimensionMismatch, InvariantViolation

ORTHO_TOL = 1e-9
DET_TOL = 1e-9
# Relative residual below which Gram-Schmidt inputs count as dependent.
GS_DEGENERACY_TOL = 1e-8


def is_rotation(M, ortho_tol=ORTHO_TOL, det_tol=DET_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        return False
    n = M.shape[0]
    if not np.all(np.abs(M.T @ M - np.eye(n)) < ortho_tol):
        return False
    return abs(np.linalg.det(M) - 1.0) < det_tol


def require_rotation(M, name="matrix"):
    """Validate and return M as a proper rotation, or raise."""
    M = np.asarray(M, dtype=float)
    if not is_rotation(M):
        raise InvariantViolation(f"{name} is not a proper rotation matrix")
    return M


def gram_schmidt(vectors):
    """Orthonormalize n-1 independent vectors in R^n.

    Returns an ``(n-1, n)`` array of rows b_1..b_{n-1} with
    span(b_1..b_k) = span(z_1..z_k) for every k and b_1 = z_1/||z_1||.
    Raises DegenerateInput when a residual collapses below the
    degeneracy threshold (dependent or near-dependent inputs).
    """
    z = np.atleast_2d(np.asarray(vectors, dtype=float))
    m, n = z.shape
    if m != n - 1:
        raise DimensionMismatch(f"expected {n - 1} vectors in R^{n}, got {m}")
    scale = np.abs(z).max()
    if scale == 0.0:
        raise DegenerateInput("all input vectors are zero")
    delta = GS_DEGENERACY_TOL * scale
    basis = np.empty_like(z)
    for k in range(m):
        v = z[k].copy()
        for prev in basis[:k]:
            v -= (v @ prev) * prev
        norm = np.linalg.norm(v)
        if norm < delta:
            raise DegenerateInput(
                f"vector {k} is dependent on its predecessors (residual {norm:.3e})"
            )
        basis[k] = v / norm
    return basis


def complete_rotation(basis):
    """Append the pseudovector to n-1 orthonormal vectors, giving a
    proper rotation.

    In 3-D the last column is the cross product of the first two; in
    general n it is the generalized cross product built from signed
    cofactors of the ``n x (n-1)`` column matrix, with the overall sign
    fixed so the determinant is +1.
    """
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    m, n = b.shape
    if m != n - 1:
        raise DimensionMismatch(f"expected {n - 1} vectors in R^{n}, got {m}")
    gram = b @ b.T
    if not np.all(np.abs(gram - np.eye(m)) < 1e-8):
        raise InvariantViolation("input vectors are not orthonormal")
    if n == 3:
        last = np.cross(b[0], b[1])
    else:
        last = np.empty(n)
        cols = b.T  # (n, n-1)
        for i in range(n):
            minor = np.delete(cols, i, axis=0)
            last[i] = (-1.0) ** i * np.linalg.det(minor)
    B = np.column_stack([b.T, last])
    if np.linalg.det(B) < 0:
        B[:, -1] = -B[:, -1]
    return B


def relative_orientation(C_j, C_i):
    """Orientation of frame j seen from frame i: C_j C_i^T."""
    C_j = np.asarray(C_j, dtype=float)
    C_i = np.asarray(C_i, dtype=float)
    if C_j.shape != C_i.shape:
        raise DimensionMismatch(f"shape mismatch {C_j.shape} vs {C_i.shape}")
    return C_j @ C_i.T


def rotation_distance(A, B):
    """Frobenius distance between two rotations."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def random_rotation(dimension, seed):
    """Haar-distributed proper rotation, deterministic per seed."""
    if dimension < 2:
        raise DimensionMismatch("rotations need dimension >= 2")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    return special_ortho_group.rvs(dimension, random_state=rng)


def axis_angle_matrix(axis, angle):
    """3-D rotation about a (not necessarily unit) axis by ``angle``
    radians, via Rodrigues' formula."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,):
        raise DimensionMismatch("axis must be a 3-vector")
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise InvariantViolation("axis must be nonzero")
    k = axis / norm
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
