"""Directed weighted interaction graphs and their Laplacians.

Edge convention: an edge ``(i, j, w)`` means agent ``i`` senses agent
``j`` (``j`` is a neighbor of ``i``), so information flows from ``j``
to ``i``.  Reachability for the rooted-out-branch test is therefore
taken along the reversed sensing edges: a root is a vertex whose
information reaches every other vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation

# |lambda| below this fraction of the largest eigenvalue magnitude counts
# as zero in spectral tests.
ZERO_EIG_TOL = 1e-9


@dataclass(frozen=True)
class DiGraph:
    """Immutable directed weighted graph on vertices ``0..n_vertices-1``."""

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n_vertices < 1:
            raise InvariantViolation("graph needs at least one vertex")
        n = self.n_vertices
        canon = []
        seen = set()
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < n and 0 <= j < n):
                raise InvariantViolation(f"edge ({i},{j}) out of range")
            if i == j:
                raise InvariantViolation(f"self-loop at vertex {i}")
            if w <= 0:
                raise InvariantViolation(f"edge ({i},{j}) has nonpositive weight {w}")
            if (i, j) in seen:
                raise InvariantViolation(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            canon.append((i, j, w))
        object.__setattr__(self, "edges", tuple(canon))

    def neighbors(self, i):
        """Vertices sensed by ``i`` with their weights, as (j, w) pairs."""
        return [(j, w) for (k, j, w) in self.edges if k == i]

    def adjacency(self):
        """Weighted adjacency matrix A with A[i, j] = a_ij for j in N_i."""
        a = np.zeros((self.n_vertices, self.n_vertices))
        for i, j, w in self.edges:
            a[i, j] = w
        return a


def laplacian(g: DiGraph) -> np.ndarray:
    """Graph Laplacian: diagonal holds neighbor weight sums, off-diagonal
    the negated edge weights."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


def has_rooted_out_branch(g: DiGraph) -> bool:
    """True iff some vertex's information reaches every other vertex.

    Searches the reversed sensing graph (edges along information flow
    j -> i) from each candidate root.
    """
    n = g.n_vertices
    flow = [[] for _ in range(n)]
    for i, j, _ in g.edges:
        flow[j].append(i)
    for root in range(n):
        seen = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for u in flow[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) == n:
            return True
    return False


def zero_eigenvalue_count(L: np.ndarray, tol: float = ZERO_EIG_TOL) -> int:
    """Number of eigenvalues of L that are zero within tolerance
    (relative to the largest eigenvalue magnitude)."""
    eig = np.linalg.eigvals(L)
    scale = max(1.0, np.abs(eig).max())
    return int(np.sum(np.abs(eig) < tol * scale))


def zero_eigen_left_vector(L: np.ndarray, tol: float = ZERO_EIG_TOL) -> np.ndarray:
    """Left eigenvector w of the simple zero eigenvalue, normalized so
    that w . 1 = 1.  Raises if the zero eigenvalue is not simple."""
    vals, vecs = np.linalg.eig(L.T)
    scale = max(1.0, np.abs(vals).max())
    zero = np.abs(vals) < tol * scale
    if zero.sum() != 1:
        raise InvariantViolation(
            f"zero eigenvalue has multiplicity {int(zero.sum())}; "
            "graph lacks a rooted-out branch"
        )
    w = vecs[:, zero].ravel()
    w = np.real_if_close(w, tol=1000)
    w = np.real(w)
    s = w.sum()
    if abs(s) < 1e-12:
        raise InvariantViolation("left null vector has zero sum; cannot normalize")
    w = w / s
    # Stationary-distribution entries; clamp roundoff-negative values.
    if (w < -1e-9).any():
        raise InvariantViolation("left null vector has negative entries")
    return np.clip(w, 0.0, None)


def slowest_nonzero_rate(L: np.ndarray, tol: float = ZERO_EIG_TOL) -> float:
    """Smallest real part among the nonzero eigenvalues of L: the
    consensus convergence rate for a rooted-out-branch graph."""
    eig = np.linalg.eigvals(L)
    scale = max(1.0, np.abs(eig).max())
    nonzero = eig[np.abs(eig) >= tol * scale]
    if nonzero.size == 0:
        raise InvariantViolation("Laplacian has no nonzero eigenvalues")
    return float(np.real(nonzero).min())


def random_digraph(n, rng, edge_prob=0.4, unit_weights=False):
    """Random digraph for randomized spectral tests; may or may not have
    a rooted-out branch."""
    edges = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < edge_prob:
                w = 1.0 if unit_weights else float(rng.uniform(0.2, 2.0))
                edges.append((i, j, w))
    return DiGraph(n, edges)
