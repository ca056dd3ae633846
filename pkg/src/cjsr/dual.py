"""Dual systems and polytope Barabanov multinorms.

The dual system reverses every edge and transposes its matrix.  When the
polytope iteration converges on the dual, the support functions of the dual
polytopes, ``||x||_i = max_{u in ±V'_i} <u, x>``, form an invariant multinorm
of the original system: for every ``x`` the largest scaled outgoing image
norm equals ``||x||_i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polytope import AlgorithmOptions, Converged, run_invariant_polytope
from .smp import DEFAULT_L0, SmpCandidate, candidate_from_cycle, find_candidate_smp
from .system import Edge, MultigraphSystem

__all__ = ["dualize", "dual_candidate", "BarabanovMultinorm", "barabanov_multinorm", "verify_invariance"]


def dualize(sys: MultigraphSystem) -> MultigraphSystem:
    edges = tuple(Edge(e.id, e.target, e.source, e.label, e.matrix.T) for e in sys.edges)
    return MultigraphSystem(sys.vertices, edges)


def dual_candidate(dual: MultigraphSystem, primal_candidate: SmpCandidate) -> SmpCandidate:
    """The reversed edge sequence; its product is the transpose of the primal product."""
    return candidate_from_cycle(dual, tuple(reversed(primal_candidate.cycle)))


@dataclass(frozen=True, eq=False)
class BarabanovMultinorm:
    rho: float
    functionals: dict  # vertex id -> (d_i, N_i) array of dual vertices
    dual_outcome: Converged | None = None

    def norm(self, vertex_id: str, x) -> float:
        U = self.functionals[vertex_id]
        return float(np.max(np.abs(U.T @ np.asarray(x, dtype=float))))


def barabanov_multinorm(
    sys: MultigraphSystem,
    opts: AlgorithmOptions = AlgorithmOptions(),
    l0: int = DEFAULT_L0,
    candidate: SmpCandidate | None = None,
):
    """Run the iteration on the dual; returns a multinorm or the dual run's non-converged outcome."""
    if candidate is None:
        candidate = find_candidate_smp(sys, l0)
        if not isinstance(candidate, SmpCandidate):
            return candidate
    dual = dualize(sys)
    dc = dual_candidate(dual, candidate)
    # the dual product is the transpose, so the tie status carries over
    dc = SmpCandidate(dc.cycle, dc.averaged_value, dc.leading_class, candidate.tie, candidate.tie_with)
    out = run_invariant_polytope(dual, dc, opts)
    if not isinstance(out, Converged):
        return out
    funcs = {vid: V.points.copy() for vid, V in out.certificate.items() if V is not None}
    return BarabanovMultinorm(out.rho, funcs, out)


def verify_invariance(sys: MultigraphSystem, mn: BarabanovMultinorm, samples: int = 1000, seed: int = 0) -> float:
    """max over sampled unit x of |max_j ||Ã_ji x||_j - ||x||_i| on the scaled system."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    inv = 1.0 / mn.rho
    worst = 0.0
    for v in sys.vertices:
        outs = sys.out_edges(v.id)
        if not outs:
            raise ValueError(f"vertex {v.id!r} has no outgoing edges; the graph is not strongly connected")
        X = rng.standard_normal((v.dim, samples))
        X /= np.linalg.norm(X, axis=0, keepdims=True)
        here = np.max(np.abs(mn.functionals[v.id].T @ X), axis=0)
        best = np.zeros(samples)
        for e in outs:
            Y = inv * (e.matrix @ X)
            best = np.maximum(best, np.max(np.abs(mn.functionals[e.target].T @ Y), axis=0))
        worst = max(worst, float(np.max(np.abs(best - here))))
    return worst
