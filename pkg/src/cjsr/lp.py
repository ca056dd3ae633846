"""Small dense linear programs in standard form.

    minimize c @ x  subject to  A @ x = b,  x >= 0

Two-phase tableau simplex.  Entering columns follow the most negative reduced
cost until a run of degenerate pivots appears, then switch to Bland's rule,
which cannot cycle.  The reported solution is recomputed from the final basis
with the original data, so tableau round-off does not leak into the optimum.

The polytope algorithm solves many tiny LPs (a handful of rows, tens to a few
hundred columns); at that size a numpy tableau is several times faster than
calling out to a general solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "LPError", "solve_standard_form"]

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
DEGENERATE_SWITCH = 8


class LPError(RuntimeError):
    """The simplex failed to reach a trustworthy answer."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    nz = np.nonzero(colv)[0]
    if nz.size:
        T[nz] -= np.outer(colv[nz], T[row])


def _run(T: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> str:
    """Optimize the tableau whose last row holds reduced costs; columns >= ``allowed`` never enter."""
    m = T.shape[0] - 1
    degenerate = 0
    for _ in range(max_iter):
        red = T[-1, :allowed]
        scale = max(1.0, float(np.max(np.abs(red), initial=0.0)))
        candidates = np.nonzero(red < -PIVOT_TOL * scale)[0]
        if candidates.size == 0:
            return "optimal"
        if degenerate >= DEGENERATE_SWITCH:
            col = int(candidates[0])
        else:
            col = int(candidates[np.argmin(red[candidates])])
        colv = T[:m, col]
        pos = np.nonzero(colv > PIVOT_TOL)[0]
        if pos.size == 0:
            return "unbounded"
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        # Bland's leaving rule: smallest basic variable index among ties
        row = int(min(ties, key=lambda r: basis[r]))
        degenerate = degenerate + 1 if best <= 1e-13 else 0
        _pivot(T, row, col)
        basis[row] = col
    raise LPError(f"simplex did not terminate within {max_iter} pivots")


def solve_standard_form(c, A, b, max_iter: int | None = None) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 100
    sign = np.where(b < 0, -1.0, 1.0)
    Ah = A * sign[:, None]
    bh = b * sign

    # phase 1: artificial basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = Ah
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = bh
    T[-1, :n] = -Ah.sum(axis=0)
    T[-1, -1] = -bh.sum()
    basis = list(range(n, n + m))
    _run(T, basis, n, max_iter)
    infeas = -T[-1, -1]
    bscale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    if infeas > FEAS_TOL * bscale:
        return LPResult("infeasible", None, float("inf"))

    # drive artificials out of the basis; drop rows that are redundant
    rows = list(range(m))
    for r in range(m):
        if basis[r] >= n:
            nz = np.nonzero(np.abs(T[r, :n]) > 1e-9)[0]
            if nz.size:
                col = int(nz[0])
                _pivot(T, r, col)
                basis[r] = col
            else:
                rows.remove(r)
    T2 = np.zeros((len(rows) + 1, n + 1))
    T2[:-1, :n] = T[rows, :n]
    T2[:-1, -1] = T[rows, -1]
    basis = [basis[r] for r in rows]
    T2[-1, :n] = c
    for r, bcol in enumerate(basis):
        if c[bcol] != 0.0:
            T2[-1] -= c[bcol] * T2[r]
    status = _run(T2, basis, n, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, float("-inf"))

    x = np.zeros(n)
    if basis:
        B = A[:, basis]
        xb, *_ = np.linalg.lstsq(B, b, rcond=None)
        if np.min(xb, initial=0.0) < -1e-7 * max(1.0, float(np.max(np.abs(xb), initial=0.0))):
            xb = T2[:-1, -1]
        x[basis] = np.maximum(xb, 0.0)
    resid = float(np.max(np.abs(A @ x - b), initial=0.0))
    if resid > 1e-7 * bscale * max(1.0, float(np.max(np.abs(x), initial=0.0))):
        raise LPError(f"simplex solution violates constraints by {resid:.3e}")
    return LPResult("optimal", x, float(c @ x))
