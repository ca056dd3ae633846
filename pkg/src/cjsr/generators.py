"""Random system constructions shared by the test suite and the experiment scripts."""
from __future__ import annotations

import numpy as np

from .system import Edge, MultigraphSystem, Vertex, operator_norm, spectral_radius

__all__ = ["random_strongly_connected", "random_reducible", "random_nonnegative", "normalize_matrix"]


def normalize_matrix(M: np.ndarray) -> np.ndarray:
    """Square matrices get spectral radius 1, rectangular ones operator norm 1."""
    s = spectral_radius(M) if M.shape[0] == M.shape[1] else operator_norm(M)
    if s < 1e-12:
        s = operator_norm(M)
    return M / s if s > 0 else M


def _random_graph(rng: np.random.Generator, n: int, p_extra: float) -> list[tuple[int, int]]:
    """A Hamiltonian cycle keeps the graph strongly connected; extra edges and loops are added at random."""
    perm = rng.permutation(n)
    pairs = [(int(perm[i]), int(perm[(i + 1) % n])) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if rng.random() < p_extra:
                pairs.append((i, j))
    if n == 1 and not pairs:
        pairs.append((0, 0))
    return pairs


def _assemble(dims, pairs, make) -> MultigraphSystem:
    verts = tuple(Vertex(f"v{i}", int(d)) for i, d in enumerate(dims))
    edges = []
    for k, (i, j) in enumerate(pairs):
        M = make(int(dims[j]), int(dims[i]))
        edges.append(Edge(f"e{k}", f"v{i}", f"v{j}", f"M{k}", M))
    return MultigraphSystem(verts, tuple(edges))


def random_strongly_connected(
    rng: np.random.Generator,
    n_vertices: tuple[int, int] = (2, 4),
    dims: tuple[int, int] = (2, 3),
    p_extra: float = 0.3,
    normalize: bool = True,
) -> MultigraphSystem:
    """Gaussian entries, each matrix rescaled by :func:`normalize_matrix` when ``normalize``."""
    n = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
    ds = rng.integers(dims[0], dims[1] + 1, size=n)
    pairs = _random_graph(rng, n, p_extra)

    def make(r, c):
        M = rng.standard_normal((r, c))
        return normalize_matrix(M) if normalize else M

    return _assemble(ds, pairs, make)


def random_nonnegative(
    rng: np.random.Generator,
    n_vertices: tuple[int, int] = (1, 3),
    dims: tuple[int, int] = (1, 3),
    p_extra: float = 0.4,
) -> MultigraphSystem:
    """Entries uniform on (0, 1), not rescaled."""
    n = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
    ds = rng.integers(dims[0], dims[1] + 1, size=n)
    pairs = _random_graph(rng, n, p_extra)
    return _assemble(ds, pairs, lambda r, c: rng.random((r, c)))


def random_reducible(
    rng: np.random.Generator,
    n_vertices: tuple[int, int] = (2, 3),
    dims: tuple[int, int] = (2, 3),
    p_extra: float = 0.3,
) -> tuple[MultigraphSystem, dict]:
    """Block upper-triangular edge maps conjugated by random per-vertex bases.

    Returns the system and the hidden invariant subspaces (vertex id -> basis columns).
    Every vertex keeps a nonzero proper subspace, so the family is strict.
    """
    n = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
    ds = [int(d) for d in rng.integers(dims[0], dims[1] + 1, size=n)]
    ks = [int(rng.integers(1, d)) for d in ds]
    T = []
    for d in ds:
        while True:
            M = rng.standard_normal((d, d))
            if np.linalg.cond(M) < 50:
                break
        T.append(M)
    pairs = _random_graph(rng, n, p_extra)
    verts = tuple(Vertex(f"v{i}", d) for i, d in enumerate(ds))
    edges = []
    for k, (i, j) in enumerate(pairs):
        B = normalize_matrix(rng.standard_normal((ds[j], ds[i])))
        B[ks[j]:, : ks[i]] = 0.0
        A = T[j] @ B @ np.linalg.inv(T[i])
        edges.append(Edge(f"e{k}", f"v{i}", f"v{j}", f"M{k}", A))
    hidden = {f"v{i}": T[i][:, : ks[i]] for i in range(n)}
    return MultigraphSystem(verts, tuple(edges)), hidden
