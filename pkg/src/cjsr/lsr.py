"""Lower spectral radius of nonnegative systems and the stabilizability verdict.

The iteration mirrors the polytope algorithm with antinorms: the system is
scaled by the minimal cycle value, Perron vectors of the cycle seed upward
infinite polytopes co_plus(V_i), and images are appended while they are not
already deep inside the target body.  On termination the candidate value is
the exact lower spectral radius.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import is_strongly_connected, strongly_connected_components
from .norms import antinorm_co_plus
from .polytope import (
    AlgorithmOptions,
    Bracket,
    Converged,
    NotStronglyConnected,
    PolytopeState,
    PolytopeVertex,
    Rejected,
)
from .smp import DEFAULT_L0, NoCycles, SmpCandidate, find_candidate_smp_min
from .system import MultigraphSystem, PathCapExceeded, brute_force_lsr_bounds, product_along_path

__all__ = ["run_lsr_polytope", "verify_lsr_certificate", "StabilizabilityVerdict", "is_stabilizable"]


def _perron(P: np.ndarray) -> np.ndarray:
    ev, vecs = np.linalg.eig(P)
    i = int(np.argmax(np.abs(ev)))
    v = np.real(vecs[:, i])
    v = v / np.linalg.norm(v)
    v = -v if v.sum() < 0 else v
    if np.all(v > 1e-14):
        return v
    # a repeated Perron root (e.g. a scalar matrix) may still admit a positive vector in its eigenspace
    r = abs(ev[i])
    near = np.abs(ev - r) <= 1e-10 * max(r, 1e-300)
    if near.sum() > 1:
        B, _ = np.linalg.qr(np.real(vecs[:, near]))
        w = B @ (B.T @ np.ones(P.shape[0]))
        if np.linalg.norm(w) > 0 and np.allclose(P @ w, r * w, atol=1e-10 * max(r, 1.0) * np.linalg.norm(w)):
            w = w / np.linalg.norm(w)
            if np.all(w > 1e-14):
                return w
    return v


def _seed(scaled: MultigraphSystem, candidate: SmpCandidate):
    if candidate.leading_class == "complex_pair":
        return Rejected("complex_leading", "Perron root of a nonnegative product should be real", candidate)
    P = product_along_path(scaled, candidate.cycle)
    v = _perron(P)
    if np.any(v <= 1e-14):
        return Rejected(
            "zero_perron_component",
            f"Perron vector of cycle {list(candidate.cycle)} has zero components; the cycle product is reducible",
            candidate,
        )
    V = {x.id: [] for x in scaled.vertices}
    here = scaled.edge(candidate.cycle[0]).source
    path: tuple[str, ...] = ()
    for eid in candidate.cycle:
        V[here].append(PolytopeVertex(v, path))
        e = scaled.edge(eid)
        v = e.matrix @ v
        here = e.target
        path = path + (eid,)
    return PolytopeState(V, {k: list(vs) for k, vs in V.items()})


def _antinorm_in(snap: dict, vertex: str, w: np.ndarray) -> float:
    V = snap[vertex]
    if V is None:
        return float("inf")
    return antinorm_co_plus(V, w)


def _vertex_sets(state: PolytopeState, sys: MultigraphSystem) -> dict:
    return {v.id: state.vertex_set(v.id, "co_plus", v.dim) for v in sys.vertices}


def _duplicate(w, pool, eps) -> bool:
    scale = max(1.0, float(np.max(np.abs(w))))
    return any(np.max(np.abs(p.vector - w)) <= eps * scale for p in pool)


def run_lsr_polytope(sys: MultigraphSystem, candidate: SmpCandidate, opts: AlgorithmOptions = AlgorithmOptions()):
    """Antinorm iteration; returns Converged (rho = LSR), Bracket or Rejected."""
    if not sys.is_nonnegative():
        raise ValueError("the lower spectral radius iteration needs componentwise nonnegative matrices")
    if not is_strongly_connected(sys):
        raise NotStronglyConnected("graph is not strongly connected; run the strong component decomposition first")
    if candidate.averaged_value == 0:
        # a nilpotent cycle drives trajectories to zero in finitely many steps
        return Converged(0.0, {}, 0, candidate)
    scaled = sys.scaled(1.0 / candidate.averaged_value)
    state = _seed(scaled, candidate)
    if isinstance(state, Rejected):
        return state
    order = {v.id: i for i, v in enumerate(sys.vertices)}
    for k in range(1, opts.max_iter + 1):
        snap = _vertex_sets(state, scaled)
        additions = {v.id: [] for v in sys.vertices}
        for vid in sorted(state.R, key=order.__getitem__):
            for p in state.R[vid]:
                for e in scaled.out_edges(vid):
                    w = e.matrix @ p.vector
                    pool = state.V[e.target] + additions[e.target]
                    if _duplicate(w, pool, opts.duplicate_eps):
                        continue
                    if _antinorm_in(snap, e.target, w) <= 1 + opts.tol:
                        additions[e.target].append(PolytopeVertex(w, p.path + (e.id,)))
        for vid, new in additions.items():
            state.V[vid].extend(new)
        state.R = additions
        state.k = k
        if not any(additions.values()):
            return Converged(candidate.averaged_value, _vertex_sets(state, sys), k - 1, candidate, 0, state)
        if sum(len(vs) for vs in state.V.values()) > opts.max_vertices:
            return _cap(scaled, state, candidate, k, f"vertex budget {opts.max_vertices} exceeded")
    return _cap(scaled, state, candidate, opts.max_iter, f"iteration cap {opts.max_iter} reached")


def _min_image_antinorm(scaled: MultigraphSystem, state: PolytopeState) -> float:
    snap = _vertex_sets(state, scaled)
    low = float("inf")
    for v in scaled.vertices:
        for p in state.V[v.id]:
            for e in scaled.out_edges(v.id):
                low = min(low, _antinorm_in(snap, e.target, e.matrix @ p.vector))
    return low


def _cap(scaled, state, candidate, k, reason) -> Bracket:
    factor = min(1.0, max(0.0, _min_image_antinorm(scaled, state)))
    return Bracket(candidate.averaged_value * factor, candidate.averaged_value, k, reason, candidate)


def verify_lsr_certificate(sys: MultigraphSystem, outcome: Converged) -> float:
    """Smallest antinorm of a scaled edge image of a certificate vertex; should be >= 1 - tol."""
    inv = 1.0 / outcome.rho
    low = float("inf")
    for v in sys.vertices:
        V = outcome.certificate.get(v.id)
        if V is None:
            continue
        for x in V.vectors():
            for e in sys.out_edges(v.id):
                T = outcome.certificate.get(e.target)
                val = float("inf") if T is None else antinorm_co_plus(T, inv * (e.matrix @ x))
                low = min(low, val)
    return low


@dataclass(frozen=True)
class StabilizabilityVerdict:
    status: str  # stabilizable | not_stabilizable | unknown
    lower: float
    upper: float
    reason: str
    component: tuple[str, ...] | None = None


def _component_verdict(comp: MultigraphSystem, opts: AlgorithmOptions, l0: int, k_brute: int) -> StabilizabilityVerdict:
    ids = tuple(comp.vertex_ids)
    cand = find_candidate_smp_min(comp, l0)
    if isinstance(cand, NoCycles):
        return StabilizabilityVerdict("not_stabilizable", float("inf"), float("inf"), "component has no cycles", ids)
    if cand.averaged_value < 1:
        return StabilizabilityVerdict(
            "stabilizable", 0.0, cand.averaged_value, f"cycle {list(cand.cycle)} has averaged spectral radius < 1", ids
        )
    if comp.is_nonnegative():
        out = run_lsr_polytope(comp, cand, opts)
        if isinstance(out, Converged):
            return StabilizabilityVerdict("not_stabilizable", out.rho, out.rho, "certified lower spectral radius >= 1", ids)
        if isinstance(out, Bracket):
            if out.lower >= 1:
                return StabilizabilityVerdict("not_stabilizable", out.lower, out.upper, "bracket lower bound >= 1", ids)
            return StabilizabilityVerdict("unknown", out.lower, out.upper, out.reason, ids)
        detail = out.detail if isinstance(out, Rejected) else ""
    else:
        detail = "sign-indefinite matrices: antinorm iteration not applicable"
    try:
        br = brute_force_lsr_bounds(comp, k_brute)
    except PathCapExceeded:
        return StabilizabilityVerdict("unknown", 0.0, cand.averaged_value, detail or "path cap exceeded", ids)
    if br.lower >= 1:
        return StabilizabilityVerdict("not_stabilizable", br.lower, br.upper, "minimal-gain bound >= 1", ids)
    return StabilizabilityVerdict("unknown", br.lower, min(br.upper, cand.averaged_value), detail, ids)


def is_stabilizable(
    sys: MultigraphSystem, opts: AlgorithmOptions = AlgorithmOptions(), l0: int = DEFAULT_L0, k_brute: int = 8
) -> StabilizabilityVerdict:
    """Decide whether some admissible switching law drives every trajectory to zero.

    Infinite paths end up inside one strong component, so the system is
    stabilizable iff some component with cycles has lower spectral radius < 1.
    """
    scc = strongly_connected_components(sys)
    verdicts = []
    for comp in scc.subsystems:
        if not comp.edges:
            continue
        verdicts.append(_component_verdict(comp, opts, l0, k_brute))
    if not verdicts:
        return StabilizabilityVerdict("not_stabilizable", float("inf"), float("inf"), "graph has no cycles; no infinite trajectory exists")
    for v in verdicts:
        if v.status == "stabilizable":
            return v
    cyc = [v for v in verdicts if v.reason != "component has no cycles"] or verdicts
    lower = min(v.lower for v in cyc)
    upper = min(v.upper for v in cyc)
    if all(v.status == "not_stabilizable" for v in verdicts):
        return StabilizabilityVerdict("not_stabilizable", lower, upper, "every component has lower spectral radius >= 1")
    unknown = next(v for v in verdicts if v.status == "unknown")
    return StabilizabilityVerdict("unknown", lower, upper, unknown.reason, unknown.component)
