"""Invariant subspace families, block-triangular factorization, and recursive reduction.

A family assigns a subspace ``L'_i`` (orthonormal basis columns) to every
vertex with ``A_e L'_source ⊆ L'_target`` for every edge.  A strict family
splits the system into a restricted child and a quotient child whose spectral
radii bound the parent's from both sides.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system import Edge, MultigraphSystem, Vertex, operator_norm

__all__ = [
    "SubspaceFamily",
    "Factorization",
    "ReductionNode",
    "FactorizationError",
    "RANK_TOL",
    "orbit_span",
    "find_invariant_family",
    "factorize",
    "reduction_tree",
    "irreducible_blocks",
    "invariance_residual",
]

RANK_TOL = 1e-9


class FactorizationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SubspaceFamily:
    bases: dict  # vertex id -> (d_i, r_i) orthonormal basis

    def dims(self) -> dict[str, int]:
        return {v: int(b.shape[1]) for v, b in self.bases.items()}

    @property
    def total(self) -> int:
        return sum(self.dims().values())

    def is_strict(self, sys: MultigraphSystem) -> bool:
        return 0 < self.total < sys.total_dim


def _orthonormal_complement(Q: np.ndarray, d: int) -> np.ndarray:
    if Q.shape[1] == 0:
        return np.eye(d)
    if Q.shape[1] == d:
        return np.zeros((d, 0))
    full, _ = np.linalg.qr(np.hstack([Q, np.eye(d)]), mode="complete")
    # columns after the first r span the complement of span(Q)
    comp = full[:, Q.shape[1] :]
    comp -= Q @ (Q.T @ comp)
    comp, _ = np.linalg.qr(comp)
    return comp[:, : d - Q.shape[1]]


def _append(Q: np.ndarray, w: np.ndarray, thresh: float) -> tuple[np.ndarray, np.ndarray | None]:
    r = w - Q @ (Q.T @ w)
    r = r - Q @ (Q.T @ r)  # second pass keeps the basis orthonormal
    nr = np.linalg.norm(r)
    if nr <= thresh:
        return Q, None
    q = r / nr
    return np.hstack([Q, q[:, None]]), q


def orbit_span(sys: MultigraphSystem, vertex: str, x, tol: float = RANK_TOL) -> SubspaceFamily:
    """Smallest invariant family whose subspace at ``vertex`` contains ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != sys.dim(vertex):
        raise ValueError(f"seed has length {x.shape[0]}, vertex {vertex!r} has dim {sys.dim(vertex)}")
    nx_ = np.linalg.norm(x)
    if nx_ == 0:
        raise ValueError("seed vector must be nonzero")
    bases = {v.id: np.zeros((v.dim, 0)) for v in sys.vertices}
    bases[vertex] = (x / nx_)[:, None]
    norms = {e.id: operator_norm(e.matrix) for e in sys.edges}
    queue = [(vertex, x / nx_)]
    while queue:
        v, q = queue.pop(0)
        for e in sys.out_edges(v):
            if norms[e.id] == 0:
                continue
            w = e.matrix @ q
            Q, new = _append(bases[e.target], w, tol * norms[e.id])
            if new is not None:
                bases[e.target] = Q
                queue.append((e.target, new))
    return SubspaceFamily(bases)


def invariance_residual(sys: MultigraphSystem, fam: SubspaceFamily) -> float:
    """max over edges of ||(I - proj_target) A B_source|| / (1 + ||A||)."""
    worst = 0.0
    for e in sys.edges:
        B = fam.bases[e.source]
        if B.shape[1] == 0:
            continue
        Q = fam.bases[e.target]
        W = e.matrix @ B
        R = W - Q @ (Q.T @ W)
        worst = max(worst, operator_norm(R) / (1.0 + operator_norm(e.matrix)))
    return worst


def _dualize(sys: MultigraphSystem) -> MultigraphSystem:
    return MultigraphSystem(sys.vertices, tuple(Edge(e.id, e.target, e.source, e.label, e.matrix.T) for e in sys.edges))


def _eigen_seeds(sys: MultigraphSystem, max_len: int = 3, max_cycles: int = 200):
    """Real eigenvectors, and real/imaginary parts of complex ones, of short cycle products."""
    from .graphs import enumerate_simple_cycles
    from .system import product_along_path

    cycles = []
    for length in range(max_len, 0, -1):
        try:
            cycles = enumerate_simple_cycles(sys, length, cap=max_cycles)
            break
        except RuntimeError:
            continue
    for cyc in cycles:
        P = product_along_path(sys, cyc)
        start = sys.edge(cyc[0]).source
        if not np.all(np.isfinite(P)):
            continue
        _, vecs = np.linalg.eig(P)
        for k in range(vecs.shape[1]):
            v = vecs[:, k]
            for part in (v.real, v.imag):
                if np.linalg.norm(part) > 1e-8:
                    yield start, part


def _deterministic_seeds(sys: MultigraphSystem):
    for v in sys.vertices:
        for k in range(v.dim):
            yield v.id, np.eye(v.dim)[:, k]
    yield from _eigen_seeds(sys)


def find_invariant_family(
    sys: MultigraphSystem, trials: int | None = None, seed: int = 0, tol: float = RANK_TOL
) -> SubspaceFamily | None:
    """Search for a strict invariant family; ``None`` means no witness was found.

    Seeds are tried in a fixed order: standard basis vectors and eigenvectors
    of short cycle products of the system, the same for the transposed system,
    then ``trials`` random unit vectors on both.  A strict family of the
    transposed system gives a primal family through orthogonal complements.
    """
    if trials is None:
        trials = 20 * sys.total_dim
    if trials < 0:
        raise ValueError("trials must be >= 0")
    total = sys.total_dim
    dual = _dualize(sys)

    def primal(v, x):
        fam = orbit_span(sys, v, x, tol)
        return fam if fam.total < total else None

    def from_dual(v, x):
        fam = orbit_span(dual, v, x, tol)
        if fam.total == total:
            return None
        return SubspaceFamily({w.id: _orthonormal_complement(fam.bases[w.id], w.dim) for w in sys.vertices})

    for v, x in _deterministic_seeds(sys):
        if (fam := primal(v, x)) is not None:
            return fam
    for v, x in _deterministic_seeds(dual):
        if (fam := from_dual(v, x)) is not None:
            return fam
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        v = sys.vertices[int(rng.integers(len(sys.vertices)))]
        x = rng.standard_normal(v.dim)
        x /= np.linalg.norm(x)
        for probe in (primal, from_dual):
            if (fam := probe(v.id, x)) is not None:
                return fam
    return None


@dataclass(frozen=True, eq=False)
class Factorization:
    """Per-vertex bases ``[Q | Q_perp]`` putting every edge in block upper-triangular form."""

    bases: dict  # vertex -> (Q, Q_perp)
    child_restricted: MultigraphSystem | None
    child_quotient: MultigraphSystem | None
    off_diagonal: dict  # edge id -> D block (r_target x (d_source - r_source))
    lower_left_residual: float

    @property
    def children(self) -> tuple[MultigraphSystem, ...]:
        return tuple(c for c in (self.child_restricted, self.child_quotient) if c is not None)

    def reconstruct(self, sys: MultigraphSystem) -> dict[str, np.ndarray]:
        """Rebuild every edge matrix from the two children and the D blocks."""
        c1 = {e.id: e.matrix for e in self.child_restricted.edges} if self.child_restricted else {}
        c2 = {e.id: e.matrix for e in self.child_quotient.edges} if self.child_quotient else {}
        out = {}
        for e in sys.edges:
            Qi, Pi = self.bases[e.source]
            Qj, Pj = self.bases[e.target]
            ri, rj = Qi.shape[1], Qj.shape[1]
            M = np.zeros((e.matrix.shape[0], e.matrix.shape[1]))
            M[:rj, :ri] = c1.get(e.id, np.zeros((rj, ri)))
            M[:rj, ri:] = self.off_diagonal[e.id]
            M[rj:, ri:] = c2.get(e.id, np.zeros((Pj.shape[1], Pi.shape[1])))
            Tj = np.hstack([Qj, Pj])
            Ti = np.hstack([Qi, Pi])
            out[e.id] = Tj @ M @ Ti.T
        return out


def _child(sys: MultigraphSystem, dims: dict[str, int], blocks: dict[str, np.ndarray]) -> MultigraphSystem | None:
    keep = [Vertex(v.id, dims[v.id]) for v in sys.vertices if dims[v.id] > 0]
    if not keep:
        return None
    ids = {v.id for v in keep}
    edges = tuple(
        Edge(e.id, e.source, e.target, e.label, blocks[e.id])
        for e in sys.edges
        if e.source in ids and e.target in ids
    )
    return MultigraphSystem(tuple(keep), edges)


def factorize(sys: MultigraphSystem, fam: SubspaceFamily, tol: float = RANK_TOL) -> Factorization:
    if not fam.is_strict(sys):
        raise FactorizationError("factorization needs a strict, nontrivial invariant family")
    bases = {}
    for v in sys.vertices:
        Q = np.asarray(fam.bases[v.id], dtype=float)
        bases[v.id] = (Q, _orthonormal_complement(Q, v.dim))
    b1, b2, D = {}, {}, {}
    worst = 0.0
    for e in sys.edges:
        Qi, Pi = bases[e.source]
        Qj, Pj = bases[e.target]
        A = e.matrix
        lower_left = Pj.T @ A @ Qi
        scale = operator_norm(A)
        err = float(np.max(np.abs(lower_left), initial=0.0))
        if err > tol * max(scale, 1e-300) and err > 0:
            raise FactorizationError(f"edge {e.id!r}: family is not invariant (lower-left block {err:.3e})")
        worst = max(worst, err)
        b1[e.id] = Qj.T @ A @ Qi
        b2[e.id] = Pj.T @ A @ Pi
        D[e.id] = Qj.T @ A @ Pi
    c1 = _child(sys, {v.id: bases[v.id][0].shape[1] for v in sys.vertices}, b1)
    c2 = _child(sys, {v.id: bases[v.id][1].shape[1] for v in sys.vertices}, b2)
    return Factorization(bases, c1, c2, D, worst)


@dataclass(eq=False)
class ReductionNode:
    system: MultigraphSystem
    family: SubspaceFamily | None = None
    factorization: Factorization | None = None
    children: list["ReductionNode"] = field(default_factory=list)

    def leaves(self) -> list["ReductionNode"]:
        if not self.children:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out


def reduction_tree(
    sys: MultigraphSystem, trials: int | None = None, seed: int = 0, tol: float = RANK_TOL, _depth: int = 0, _limit: int | None = None
) -> ReductionNode:
    """Factorize recursively until no leaf yields a strict invariant family."""
    limit = sys.total_dim if _limit is None else _limit
    if _depth > limit:
        raise FactorizationError("reduction depth exceeds the total dimension; numerics are unreliable")
    node = ReductionNode(sys)
    if sys.total_dim <= 1 and len(sys.vertices) <= 1:
        return node
    fam = find_invariant_family(sys, trials, seed, tol)
    if fam is None:
        return node
    fac = factorize(sys, fam, tol=max(tol, 1e-9))
    node.family, node.factorization = fam, fac
    node.children = [reduction_tree(c, trials, seed, tol, _depth + 1, limit) for c in fac.children]
    return node


def irreducible_blocks(sys: MultigraphSystem, trials: int | None = None, seed: int = 0) -> list[MultigraphSystem]:
    return [leaf.system for leaf in reduction_tree(sys, trials, seed).leaves()]
