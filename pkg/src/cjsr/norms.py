"""Minkowski functionals of polytopes given by their vertices.

Three bodies are supported:

* ``absco``: the symmetric convex hull co{V, -V}; its functional is a norm on span(V).
* ``co_minus``: co(V) extended downward inside the nonnegative orthant; a monotone norm.
* ``co_plus``: co(V) extended upward by the orthant; its functional is an antinorm.

Each evaluation is a small LP handled by :mod:`cjsr.lp`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LPError, solve_standard_form

__all__ = ["VertexSet", "norm_absco", "norm_co_minus", "antinorm_co_plus", "evaluate", "KINDS"]

KINDS = ("absco", "co_minus", "co_plus")


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Vertices stored as the columns of a ``(dim, N)`` array."""

    kind: str
    points: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown vertex-set kind {self.kind!r}")
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] == 0:
            raise ValueError("vertex set must be a nonempty (dim, N) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("vertex set has non-finite coordinates")
        if self.kind != "absco" and np.any(pts < 0):
            raise ValueError(f"{self.kind} vertices must be componentwise nonnegative")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_vectors(cls, kind: str, vectors) -> "VertexSet":
        return cls(kind, np.column_stack([np.asarray(v, dtype=float) for v in vectors]))

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    @property
    def size(self) -> int:
        return self.points.shape[1]

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.points))

    @property
    def full_rank(self) -> bool:
        return self.rank == self.dim

    def vectors(self) -> list[np.ndarray]:
        return [self.points[:, i].copy() for i in range(self.size)]


def _check(V: VertexSet, x, kind: str) -> np.ndarray:
    if V.kind != kind:
        raise ValueError(f"expected a {kind} vertex set, got {V.kind}")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != V.dim:
        raise ValueError(f"vector of length {x.shape[0]} for a {V.dim}-dimensional vertex set")
    if kind != "absco" and np.any(x < -1e-14 * max(1.0, float(np.max(np.abs(x))))):
        raise ValueError(f"{kind} functional needs a nonnegative vector")
    return np.maximum(x, 0.0) if kind != "absco" else x


def norm_absco(V: VertexSet, x) -> float:
    """min sum|lambda| subject to V lambda = x; +inf outside span(V)."""
    x = _check(V, x, "absco")
    if not np.any(x):
        return 0.0
    P = V.points
    if V.dim == 1:
        top = float(np.max(np.abs(P)))
        return abs(float(x[0])) / top if top > 0 else float("inf")
    N = P.shape[1]
    res = solve_standard_form(np.ones(2 * N), np.hstack([P, -P]), x)
    if res.status == "infeasible":
        return float("inf")
    if res.status != "optimal":
        raise LPError(f"absco norm LP ended with status {res.status}")
    return res.value


def norm_co_minus(V: VertexSet, x) -> float:
    """min sum(lambda) subject to V lambda >= x, lambda >= 0; +inf when infeasible."""
    x = _check(V, x, "co_minus")
    if not np.any(x):
        return 0.0
    P = V.points
    if V.dim == 1:
        top = float(np.max(P))
        return float(x[0]) / top if top > 0 else float("inf")
    d, N = P.shape
    A = np.hstack([P, -np.eye(d)])
    c = np.concatenate([np.ones(N), np.zeros(d)])
    res = solve_standard_form(c, A, x)
    if res.status == "infeasible":
        return float("inf")
    if res.status != "optimal":
        raise LPError(f"co_minus norm LP ended with status {res.status}")
    return res.value


def antinorm_co_plus(V: VertexSet, x) -> float:
    """max sum(lambda) subject to V lambda <= x, lambda >= 0; +inf when unbounded."""
    x = _check(V, x, "co_plus")
    P = V.points
    if V.dim == 1:
        low = float(np.min(P))
        if low <= 0:
            return float("inf")
        return float(x[0]) / low
    d, N = P.shape
    A = np.hstack([P, np.eye(d)])
    c = np.concatenate([-np.ones(N), np.zeros(d)])
    res = solve_standard_form(c, A, x)
    if res.status == "unbounded":
        return float("inf")
    if res.status != "optimal":
        raise LPError(f"co_plus antinorm LP ended with status {res.status}")
    return max(0.0, -res.value)


def evaluate(V: VertexSet, x) -> float:
    """Dispatch on the vertex-set kind."""
    if V.kind == "absco":
        return norm_absco(V, x)
    if V.kind == "co_minus":
        return norm_co_minus(V, x)
    return antinorm_co_plus(V, x)
