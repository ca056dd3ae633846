"""Invariant polytope iteration for the constrained joint spectral radius.

Given a candidate cycle, the system is scaled so that the cycle's averaged
spectral radius is 1.  Leading eigenvectors of the cycle seed one polytope per
vertex; images of the newest vertices are appended whenever they are not
already inside the target polytope.  If the iteration stops, the polytopes
form an extremal multinorm and the candidate value is the exact spectral
radius of the system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import is_strongly_connected
from .norms import VertexSet, evaluate
from .reducibility import SubspaceFamily
from .smp import SmpCandidate
from .system import MultigraphSystem, product_along_path

__all__ = [
    "AlgorithmOptions",
    "PolytopeVertex",
    "PolytopeState",
    "Converged",
    "Bracket",
    "ReducibilityWitness",
    "Rejected",
    "NotStronglyConnected",
    "scale_system",
    "seed_eigenvectors",
    "run_invariant_polytope",
    "verify_certificate",
    "certificate_vertex_sets",
    "prune_redundant",
    "extreme_point_count",
]


@dataclass(frozen=True)
class AlgorithmOptions:
    tol: float = 1e-10
    max_iter: int = 40
    cone_mode: bool = False
    duplicate_eps: float = 1e-12
    max_vertices: int = 2000  # total vertex budget; exceeding it ends the run with a bracket
    prune_redundant: bool = False  # drop certificate vertices inside the hull of the others

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.max_vertices < 1:
            raise ValueError("max_vertices must be >= 1")


class NotStronglyConnected(ValueError):
    """The polytope iteration needs a strongly connected graph; decompose first."""


@dataclass(frozen=True, eq=False)
class PolytopeVertex:
    vector: np.ndarray
    path: tuple[str, ...]  # edges applied to the first seed to reach this vertex
    flagged: bool = False  # norm was within tol of 1 when added


@dataclass(eq=False)
class PolytopeState:
    V: dict  # vertex id -> list[PolytopeVertex]
    R: dict  # vertex id -> list[PolytopeVertex], added in the last round
    k: int = 0
    span_dims: list = field(default_factory=list)  # d^(0), d^(1), ...

    def counts(self) -> dict[str, int]:
        return {v: len(vs) for v, vs in self.V.items()}

    def vertex_set(self, vertex_id: str, kind: str, dim: int) -> VertexSet | None:
        vs = self.V[vertex_id]
        if not vs:
            return None
        return VertexSet(kind, np.column_stack([p.vector for p in vs]))

    def span_dim_total(self) -> int:
        return sum(int(np.linalg.matrix_rank(np.column_stack([p.vector for p in vs]))) for vs in self.V.values() if vs)


@dataclass(frozen=True, eq=False)
class Converged:
    rho: float
    certificate: dict  # vertex id -> VertexSet
    iterations: int
    smp: SmpCandidate
    flagged: int = 0
    state: PolytopeState | None = None
    kind: str = "converged"


@dataclass(frozen=True, eq=False)
class Bracket:
    lower: float
    upper: float
    iterations: int = 0
    reason: str = ""
    smp: SmpCandidate | None = None
    kind: str = "bracket"

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError(f"inconsistent bracket [{self.lower}, {self.upper}]")


@dataclass(frozen=True, eq=False)
class ReducibilityWitness:
    family: SubspaceFamily
    iterations: int = 0
    kind: str = "reducible"


@dataclass(frozen=True, eq=False)
class Rejected:
    reason: str  # complex_leading | multiple_leading | tie | zero_perron_component
    detail: str = ""
    smp: SmpCandidate | None = None
    kind: str = "rejected"


def scale_system(sys: MultigraphSystem, candidate: SmpCandidate) -> MultigraphSystem:
    if not candidate.averaged_value > 0:
        raise ValueError("candidate has zero averaged value; cannot scale")
    return sys.scaled(1.0 / candidate.averaged_value)


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def _leading_vector(P: np.ndarray) -> np.ndarray:
    ev, vecs = np.linalg.eig(P)
    i = int(np.argmax(np.abs(ev)))
    return _sign_normalize(np.real(vecs[:, i]))


def _reject_class(candidate: SmpCandidate) -> Rejected | None:
    if candidate.leading_class == "complex_pair":
        return Rejected("complex_leading", "leading eigenvalue of the candidate product is not real (smp leading_class=complex_pair)", candidate)
    if candidate.leading_class == "real_multiple":
        return Rejected("multiple_leading", "leading eigenvalue of the candidate product is not simple (smp leading_class=real_multiple)", candidate)
    if candidate.tie:
        return Rejected("tie", f"another cycle {list(candidate.tie_with or ())} attains the same averaged value", candidate)
    return None


def seed_eigenvectors(scaled: MultigraphSystem, candidate: SmpCandidate, cone_mode: bool = False):
    """Leading eigenvector of the scaled cycle product and its images along the cycle.

    Returns a ``PolytopeState`` or a ``Rejected`` outcome.  In cone mode the
    Perron vector must be strictly positive.
    """
    bad = _reject_class(candidate)
    if bad is not None:
        return bad
    P = product_along_path(scaled, candidate.cycle)
    v = _leading_vector(P)
    if cone_mode:
        v = np.abs(v) if np.all(v >= -1e-12) or np.all(v <= 1e-12) else v
        if np.any(v <= 1e-14):
            return Rejected("zero_perron_component", f"Perron vector of cycle {list(candidate.cycle)} has zero or negative components", candidate)
    V = {x.id: [] for x in scaled.vertices}
    here = scaled.edge(candidate.cycle[0]).source
    path: tuple[str, ...] = ()
    for eid in candidate.cycle:
        V[here].append(PolytopeVertex(v, path))
        e = scaled.edge(eid)
        v = e.matrix @ v
        here = e.target
        path = path + (eid,)
    R = {k: list(vs) for k, vs in V.items()}
    state = PolytopeState(V, R)
    state.span_dims.append(state.span_dim_total())
    return state


def _is_duplicate(w: np.ndarray, pool: list[PolytopeVertex], eps: float, symmetric: bool) -> bool:
    scale = max(1.0, float(np.max(np.abs(w))))
    for p in pool:
        if np.max(np.abs(p.vector - w)) <= eps * scale:
            return True
        if symmetric and np.max(np.abs(p.vector + w)) <= eps * scale:
            return True
    return False


def _snapshot(state: PolytopeState, kind: str, sys: MultigraphSystem) -> dict:
    return {v.id: state.vertex_set(v.id, kind, v.dim) for v in sys.vertices}


def _norm_in(snap: dict, vertex: str, w: np.ndarray) -> float:
    V = snap[vertex]
    if V is None:
        return float("inf") if np.any(w) else 0.0
    return evaluate(V, w)


def _span_family(state: PolytopeState, sys: MultigraphSystem) -> SubspaceFamily:
    bases = {}
    for v in sys.vertices:
        vs = state.V[v.id]
        if not vs:
            bases[v.id] = np.zeros((v.dim, 0))
            continue
        M = np.column_stack([p.vector for p in vs])
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        r = int(np.sum(s > 1e-9 * max(1.0, s[0])))
        bases[v.id] = U[:, :r]
    return SubspaceFamily(bases)


def _max_image_norm(scaled: MultigraphSystem, state: PolytopeState, kind: str) -> float:
    snap = _snapshot(state, kind, scaled)
    worst = 0.0
    for v in scaled.vertices:
        for p in state.V[v.id]:
            for e in scaled.out_edges(v.id):
                worst = max(worst, _norm_in(snap, e.target, e.matrix @ p.vector))
    return worst


def run_invariant_polytope(sys: MultigraphSystem, candidate: SmpCandidate, opts: AlgorithmOptions = AlgorithmOptions()):
    """Run the iteration; returns Converged, Bracket, ReducibilityWitness or Rejected."""
    if not is_strongly_connected(sys):
        raise NotStronglyConnected("graph is not strongly connected; run the strong component decomposition first")
    if opts.cone_mode and not sys.is_nonnegative():
        raise ValueError("cone mode needs componentwise nonnegative matrices")
    kind = "co_minus" if opts.cone_mode else "absco"
    symmetric = not opts.cone_mode
    scaled = scale_system(sys, candidate)
    state = seed_eigenvectors(scaled, candidate, opts.cone_mode)
    if isinstance(state, Rejected):
        return state
    total_dim = sys.total_dim
    flagged = 0
    order = {v.id: i for i, v in enumerate(sys.vertices)}
    for k in range(1, opts.max_iter + 1):
        snap = _snapshot(state, kind, scaled)
        additions: dict[str, list[PolytopeVertex]] = {v.id: [] for v in sys.vertices}
        for vid in sorted(state.R, key=order.__getitem__):
            for p in state.R[vid]:
                for e in scaled.out_edges(vid):
                    w = e.matrix @ p.vector
                    if not np.any(w):
                        continue
                    pool = state.V[e.target] + additions[e.target]
                    if _is_duplicate(w, pool, opts.duplicate_eps, symmetric):
                        continue
                    val = _norm_in(snap, e.target, w)
                    if val >= 1 - opts.tol:
                        near = val <= 1 + opts.tol
                        flagged += int(near)
                        additions[e.target].append(PolytopeVertex(w, p.path + (e.id,), near))
        for vid, new in additions.items():
            state.V[vid].extend(new)
        state.R = additions
        state.k = k
        state.span_dims.append(state.span_dim_total())
        d_now, d_prev = state.span_dims[-1], state.span_dims[-2]
        done = not any(additions.values())
        if d_now < total_dim and (done or d_now == d_prev):
            return ReducibilityWitness(_span_family(state, sys), k)
        if done:
            cert = {v.id: state.vertex_set(v.id, kind, v.dim) for v in sys.vertices}
            if opts.prune_redundant:
                cert = {vid: prune_redundant(V, opts.tol) if V is not None else None for vid, V in cert.items()}
            # iterations counts the rounds that produced new vertices
            return Converged(candidate.averaged_value, cert, k - 1, candidate, flagged, state)
        if sum(len(vs) for vs in state.V.values()) > opts.max_vertices:
            return _cap_bracket(scaled, state, kind, candidate, k, f"vertex budget {opts.max_vertices} exceeded")
    return _cap_bracket(scaled, state, kind, candidate, opts.max_iter, f"iteration cap {opts.max_iter} reached")


def _cap_bracket(scaled, state, kind, candidate, k, reason) -> Bracket:
    factor = max(1.0, _max_image_norm(scaled, state, kind))
    return Bracket(candidate.averaged_value, candidate.averaged_value * factor, k, reason, candidate)


def prune_redundant(V: VertexSet, tol: float = 1e-10) -> VertexSet:
    """Remove vertices whose functional with respect to the remaining ones is <= 1 + tol.

    For co_plus the test is mirrored (antinorm >= 1 - tol).  The body is unchanged.
    """
    keep = list(range(V.size))
    for i in range(V.size):
        rest = [j for j in keep if j != i]
        if not rest:
            continue
        val = evaluate(VertexSet(V.kind, V.points[:, rest]), V.points[:, i])
        if (val >= 1 - tol) if V.kind == "co_plus" else (val <= 1 + tol):
            keep = rest
    return VertexSet(V.kind, V.points[:, keep])


def extreme_point_count(V: VertexSet, tol: float = 1e-10) -> int:
    return prune_redundant(V, tol).size


def certificate_vertex_sets(outcome: Converged) -> dict:
    return outcome.certificate


def verify_certificate(sys: MultigraphSystem, outcome: Converged) -> float:
    """Largest norm of a scaled edge image of a certificate vertex in its target polytope.

    Uses only the system, the certified value and the certificate vertex sets.
    """
    if not outcome.rho > 0:
        raise ValueError("certificate has zero spectral radius")
    inv = 1.0 / outcome.rho
    worst = 0.0
    for v in sys.vertices:
        V = outcome.certificate.get(v.id)
        if V is None:
            continue
        for x in V.vectors():
            for e in sys.out_edges(v.id):
                w = inv * (e.matrix @ x)
                T = outcome.certificate.get(e.target)
                if T is None:
                    val = float("inf") if np.any(w) else 0.0
                else:
                    val = evaluate(T, w)
                worst = max(worst, val)
    return worst
