"""Candidate spectrum-maximizing and spectrum-minimizing products over short cycles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import (
    DEFAULT_CYCLE_CAP,
    canonical_rotation,
    is_primitive,
    iter_cycle_batches,
    sorted_edge_ids,
)
from .system import MultigraphSystem, PathError, path_endpoints, product_along_path

__all__ = [
    "SmpCandidate",
    "NoCycles",
    "Dominance",
    "find_candidate_smp",
    "find_candidate_smp_min",
    "candidate_from_cycle",
    "leading_class",
    "check_dominance",
    "DEFAULT_L0",
]

DEFAULT_L0 = 10
SIMPLE_GAP = 1e-8
TIE_RTOL = 1e-10


@dataclass(frozen=True)
class SmpCandidate:
    """A closed path with its averaged spectral radius rho(P)^(1/len).

    ``cycle`` is stored in the rotation used for seeding; ``canonical`` is the
    lexicographically smallest rotation.
    """

    cycle: tuple[str, ...]
    averaged_value: float
    leading_class: str  # real_simple | real_multiple | complex_pair
    tie: bool = False
    tie_with: tuple[str, ...] | None = None

    @property
    def length(self) -> int:
        return len(self.cycle)

    @property
    def canonical(self) -> tuple[str, ...]:
        return canonical_rotation(self.cycle)


@dataclass(frozen=True)
class NoCycles:
    """The graph has no closed path within the search length."""

    l0: int
    reason: str = "graph has no closed path; long products do not exist, so the spectral radius is 0"


@dataclass(frozen=True)
class Dominance:
    q: float
    cycle: tuple[str, ...] | None


def leading_class(M: np.ndarray, gap: float = SIMPLE_GAP) -> str:
    ev = np.linalg.eigvals(np.asarray(M, dtype=float))
    order = np.argsort(-np.abs(ev), kind="stable")
    ev = ev[order]
    top = abs(ev[0])
    if top == 0:
        return "real_multiple" if len(ev) > 1 else "real_simple"
    if abs(ev[0].imag) > gap * top:
        return "complex_pair"
    if len(ev) > 1 and abs(ev[1]) >= top * (1 - gap):
        return "real_multiple"
    return "real_simple"


def _averaged(prods: np.ndarray, k: int) -> np.ndarray:
    if prods.shape[1] == 1:
        rho = np.abs(prods[:, 0, 0])
    else:
        rho = np.max(np.abs(np.linalg.eigvals(prods)), axis=1)
    return rho ** (1.0 / k)


def _edge_classes(sys: MultigraphSystem) -> dict[str, int]:
    """Identify parallel edges carrying identical matrices; they never create genuine ties."""
    cls: dict[str, int] = {}
    reps: list = []
    for e in sys.edges:
        for idx, r in enumerate(reps):
            if r.source == e.source and r.target == e.target and np.array_equal(r.matrix, e.matrix):
                cls[e.id] = idx
                break
        else:
            cls[e.id] = len(reps)
            reps.append(e)
    return cls


def _class_root(cycle, classes: dict[str, int]) -> tuple[int, ...]:
    word = tuple(classes[e] for e in cycle)
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            word = word[:p]
            break
    return min(word[r:] + word[:r] for r in range(len(word)))


def _search(sys: MultigraphSystem, l0: int, maximize: bool, cap: int):
    ids = sorted_edge_ids(sys)
    entries = []  # (value, length, ranks)
    for seqs, prods, _ in iter_cycle_batches(sys, l0, cap):
        k = seqs.shape[1]
        vals = _averaged(prods, k)
        entries.append((vals, seqs))
    if not entries:
        return None
    values = np.concatenate([v for v, _ in entries])
    best_val = values.max() if maximize else values.min()
    # best by value, then shorter, then canonical order; collect near-ties for the flag
    near = []
    for vals, seqs in entries:
        scale = max(abs(best_val), 1e-300)
        hit = np.nonzero(np.abs(vals - best_val) <= TIE_RTOL * scale)[0]
        for h in hit:
            near.append((float(vals[h]), tuple(ids[r] for r in seqs[h])))
    exact = min((c for v, c in near if v == best_val), key=lambda c: (len(c), c))
    # parallel copies of the same matrix give equal values up to round-off; prefer the shortest
    classes = _edge_classes(sys)
    root = _class_root(exact, classes)
    value, chosen = min(((v, c) for v, c in near if _class_root(c, classes) == root), key=lambda vc: (len(vc[1]), vc[1]))
    return value, chosen, near


def _finalize(sys: MultigraphSystem, value: float, cycle, near) -> SmpCandidate:
    classes = _edge_classes(sys)
    root = _class_root(cycle, classes)
    others = sorted((c for _, c in near if _class_root(c, classes) != root), key=lambda c: (len(c), c))
    prod = product_along_path(sys, cycle)
    return SmpCandidate(
        cycle=tuple(cycle),
        averaged_value=value,
        leading_class=leading_class(prod),
        tie=bool(others),
        tie_with=others[0] if others else None,
    )


def find_candidate_smp(sys: MultigraphSystem, l0: int = DEFAULT_L0, cap: int = DEFAULT_CYCLE_CAP):
    """Cycle of length <= l0 maximizing rho(P)^(1/len); ``NoCycles`` when there is none."""
    found = _search(sys, l0, True, cap)
    if found is None:
        return NoCycles(l0)
    return _finalize(sys, *found)


def find_candidate_smp_min(sys: MultigraphSystem, l0: int = DEFAULT_L0, cap: int = DEFAULT_CYCLE_CAP):
    """Cycle of length <= l0 minimizing rho(P)^(1/len); ``NoCycles`` when there is none."""
    found = _search(sys, l0, False, cap)
    if found is None:
        return NoCycles(l0)
    return _finalize(sys, *found)


def candidate_from_cycle(sys: MultigraphSystem, cycle) -> SmpCandidate:
    """Candidate for a user-supplied closed path, kept in the given rotation.

    The tie flag is not computed for manual candidates.
    """
    cycle = tuple(cycle)
    if not cycle:
        raise PathError("candidate cycle is empty")
    start, end = path_endpoints(sys, cycle)
    if start != end:
        raise PathError(f"candidate is not closed: starts at {start!r}, ends at {end!r}")
    if not is_primitive(cycle):
        raise PathError("candidate is a power of a shorter cycle; pass the shorter cycle")
    prod = product_along_path(sys, cycle)
    rho = float(np.max(np.abs(np.linalg.eigvals(prod))))
    return SmpCandidate(cycle, rho ** (1.0 / len(cycle)), leading_class(prod))


def check_dominance(sys: MultigraphSystem, candidate: SmpCandidate, l0: int = DEFAULT_L0, cap: int = DEFAULT_CYCLE_CAP) -> Dominance:
    """Largest normalized averaged radius among other cycles of length <= l0.

    Cycles that only differ from the candidate by parallel copies of the same
    matrix are not counted as other cycles.
    """
    if candidate.averaged_value <= 0:
        raise ValueError("candidate has zero averaged value")
    ids = sorted_edge_ids(sys)
    classes = _edge_classes(sys)
    root = _class_root(candidate.cycle, classes)
    best, best_cycle = 0.0, None
    for seqs, prods, _ in iter_cycle_batches(sys, l0, cap):
        vals = _averaged(prods, seqs.shape[1]) / candidate.averaged_value
        for h in np.argsort(-vals, kind="stable"):
            if vals[h] < best:
                break
            cyc = tuple(ids[r] for r in seqs[h])
            if _class_root(cyc, classes) == root:
                continue
            if vals[h] > best or best_cycle is None or (len(cyc), cyc) < (len(best_cycle), best_cycle):
                best, best_cycle = float(vals[h]), cyc
            break
    return Dominance(best, best_cycle)
