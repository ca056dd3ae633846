"""Zero stability of variable-stepsize 3- and 4-step BDF formulas.

With step ratios ``w_j = h_j / h_{j-1}``, one step of the k-step BDF recursion
acts on the differences of consecutive solution values through a reduced
companion matrix ``C(w_1, ..., w_{k-1})``.  The ratio sequence must shift by
one position per step, which is encoded as a multigraph on tuples of ratios.
Zero stability over a ratio grid is equivalent to the constrained spectral
radius of that system being below 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import identify_vertices
from .polytope import AlgorithmOptions, Converged, run_invariant_polytope
from .smp import candidate_from_cycle, leading_class
from .system import Edge, MultigraphSystem, Vertex, spectral_radius

__all__ = [
    "bdf3_gammas",
    "bdf3_matrix",
    "bdf4_matrix",
    "bdf3_matrix_horner",
    "bdf4_matrix_horner",
    "RatioGrid",
    "parse_ratio_template",
    "build_bdf_system",
    "SweepRow",
    "SweepResult",
    "theta_sweep",
    "COMPLEX_FLAG",
]

COMPLEX_FLAG = "complex leading eigenvalue; polytope certification out of scope"


def _check_ratios(*ws: float) -> None:
    for w in ws:
        if not (w > 0 and math.isfinite(w)):
            raise ValueError(f"step ratios must be positive and finite, got {w!r}")


def bdf3_gammas(w1: float, w2: float) -> tuple[float, float]:
    _check_ratios(w1, w2)
    den = (w1 + 1) * (3 * w1 * w2**2 + 4 * w1 * w2 + w1 + 2 * w2 + 1)
    g1 = (w2**2 * (w1**2 * w2**2 + 4 * w1**2 * w2 + 2 * w1 * w2 + 3 * w1**2 + 3 * w1 + 1)) / den
    g0 = -(w1**3 * w2**2 * (w2 + 1) ** 2) / den
    return g1, g0


def bdf3_matrix(w1: float, w2: float) -> np.ndarray:
    g1, g0 = bdf3_gammas(w1, w2)
    return np.array([[g1, g0], [1.0, 0.0]])


def bdf4_matrix(w1: float, w2: float, w3: float) -> np.ndarray:
    _check_ratios(w1, w2, w3)
    D = (
        3 * w2 * w3**2
        + 4 * w2 * w3
        + 2 * w3
        + w2
        + w1 * (w2**2 * (4 * w3 + 1) * (w3 + 1) ** 2 + 2 * w3 + 2 * w2 * (3 * w3**2 + 4 * w3 + 1) + 1)
        + 1
    )
    X = w3 * w2 + w2 + 1
    g2 = (w3 + 1) ** 2 * X**2 * (w1 * X + 1) ** 2 / ((w2 + 1) * (w2 * w1 + w1 + 1) * D) - 1
    g1 = (
        -(w3**2) * X**2 * (w1 * X + 1) ** 2 / ((w1 + 1) * D)
        + (w3 + 1) ** 2 * X**2 * (w1 * X + 1) ** 2 / ((w2 + 1) * (w2 * w1 + w1 + 1) * D)
        - 1
    )
    g0 = w1**4 * w2**3 * w3**2 * (w3 + 1) ** 2 * X**2 / ((w1 + 1) * (w2 * w1 + w1 + 1) * D)
    return np.array([[g2, g1, g0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def _horner(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def bdf3_matrix_horner(w1: float, w2: float) -> np.ndarray:
    """Same matrix with every factor regrouped as nested polynomials in w2."""
    _check_ratios(w1, w2)
    den = (w1 + 1) * _horner([3 * w1, 4 * w1 + 2, w1 + 1], w2)
    num1 = w2**2 * _horner([w1**2, 4 * w1**2 + 2 * w1, 3 * w1**2 + 3 * w1 + 1], w2)
    num0 = -(w1**3) * w2**2 * _horner([1.0, 2.0, 1.0], w2)
    return np.array([[num1 / den, num0 / den], [1.0, 0.0]])


def bdf4_matrix_horner(w1: float, w2: float, w3: float) -> np.ndarray:
    """Same matrix with the shared factors regrouped as nested polynomials in w3."""
    _check_ratios(w1, w2, w3)
    inner = w2**2 * _horner([4.0, 9.0, 6.0, 1.0], w3) + _horner([6 * w2, 8 * w2 + 2, 2 * w2 + 1], w3)
    D = _horner([3 * w2, 4 * w2 + 2, w2 + 1], w3) + w1 * inner
    X = _horner([w2, w2 + 1], w3)
    s = X**2 * (w1 * X + 1) ** 2
    a = _horner([1.0, 2.0, 1.0], w3) * s / ((w2 + 1) * (w2 * w1 + w1 + 1) * D)
    g2 = a - 1
    g1 = -(w3**2) * s / ((w1 + 1) * D) + a - 1
    g0 = w1**4 * w2**3 * w3**2 * _horner([1.0, 2.0, 1.0], w3) * X**2 / ((w1 + 1) * (w2 * w1 + w1 + 1) * D)
    return np.array([[g2, g1, g0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class RatioGrid:
    k: int
    ratio_values: tuple[float, ...]
    theta: float | None = None
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.k not in (3, 4):
            raise ValueError("only 3- and 4-step formulas are supported")
        vals = tuple(float(w) for w in self.ratio_values)
        if not vals:
            raise ValueError("ratio grid is empty")
        _check_ratios(*vals)
        object.__setattr__(self, "ratio_values", vals)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"w{i}" for i in range(len(vals))))
        if len(self.names) != len(vals):
            raise ValueError("one name per ratio value")


def parse_ratio_template(template: str | Sequence[str], theta: float) -> tuple[float, ...]:
    """Evaluate tokens like ``theta``, ``1/theta``, ``1``, ``0.5`` or ``2*theta`` at ``theta``."""
    tokens = template.split(",") if isinstance(template, str) else list(template)
    out = []
    for raw in tokens:
        tok = raw.strip().replace("θ", "theta").replace(" ", "")
        if not tok:
            raise ValueError(f"empty token in ratio template {template!r}")
        out.append(_eval_token(tok, theta))
    return tuple(out)


def _eval_token(tok: str, theta: float) -> float:
    if "/" in tok:
        num, den = tok.split("/", 1)
        return _eval_token(num, theta) / _eval_token(den, theta)
    if "*" in tok:
        a, b = tok.split("*", 1)
        return _eval_token(a, theta) * _eval_token(b, theta)
    if "^" in tok:
        a, b = tok.split("^", 1)
        return _eval_token(a, theta) ** float(b)
    if tok == "theta":
        return theta
    return float(tok)


def _companion(k: int, ws: Sequence[float]) -> np.ndarray:
    return bdf3_matrix(*ws) if k == 3 else bdf4_matrix(*ws)


def build_bdf_system(grid: RatioGrid, identify: bool = True) -> MultigraphSystem:
    """Vertices are (k-1)-tuples of ratio indices; each step shifts the tuple by one ratio."""
    k, vals, names = grid.k, grid.ratio_values, grid.names
    tuples = list(itertools.product(range(len(vals)), repeat=k - 1))

    def vid(t):
        return "(" + ",".join(names[i] for i in t) + ")"

    vertices = tuple(Vertex(vid(t), k - 1) for t in tuples)
    edges = []
    for t in tuples:
        for new in range(len(vals)):
            nxt = t[1:] + (new,)
            args = [vals[i] for i in nxt]
            label = "C(" + ",".join(names[i] for i in nxt) + ")"
            edges.append(Edge(f"{vid(t)}>{vid(nxt)}", vid(t), vid(nxt), label, _companion(k, args)))
    sys = MultigraphSystem(vertices, tuple(edges))
    return identify_vertices(sys) if identify else sys


@dataclass(frozen=True)
class SweepRow:
    theta: float
    rho: float  # spectral radius of the all-theta companion matrix
    leading_class: str
    verdict: str  # zero_stable | not_zero_stable | bracket | flagged
    lower: float | None = None
    upper: float | None = None
    note: str = ""


@dataclass(frozen=True)
class SweepResult:
    k: int
    template: tuple[str, ...]
    rows: tuple[SweepRow, ...]
    crossing: float | None  # linear interpolation of rho = 1 between grid points


def _theta_loop(sys: MultigraphSystem, label: str):
    for e in sys.edges:
        if e.source == e.target and e.label == label:
            return e
    return None


def theta_sweep(
    k: int,
    grid_template: str | Sequence[str],
    theta_range: tuple[float, float],
    step: float,
    opts: AlgorithmOptions | None = None,
    certify: bool = True,
) -> SweepResult:
    """Spectral radius of the all-theta matrix over a theta grid, plus a certification attempt when possible."""
    lo, hi = theta_range
    if not lo < hi:
        raise ValueError("theta range needs lo < hi")
    if not step > 0:
        raise ValueError("step must be positive")
    if k not in (3, 4):
        raise ValueError("only 3- and 4-step formulas are supported")
    tokens = tuple(t.strip() for t in (grid_template.split(",") if isinstance(grid_template, str) else grid_template))
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    thetas = [lo + i * step for i in range(n)]
    opts = opts or AlgorithmOptions(max_iter=20, max_vertices=400)
    rows = []
    for theta in thetas:
        C = _companion(k, [theta] * (k - 1))
        rho = spectral_radius(C)
        cls = leading_class(C)
        if cls != "real_simple" or not certify:
            rows.append(SweepRow(theta, rho, cls, "flagged" if cls != "real_simple" else "eigenvalue_only", note=COMPLEX_FLAG if cls == "complex_pair" else ""))
            continue
        row = _certify_point(k, tokens, theta, rho, cls, opts)
        rows.append(row)
    crossing = None
    for a, b in zip(rows, rows[1:]):
        if (a.rho - 1) * (b.rho - 1) <= 0 and a.rho != b.rho:
            crossing = a.theta + (1 - a.rho) * (b.theta - a.theta) / (b.rho - a.rho)
            break
    return SweepResult(k, tokens, tuple(rows), crossing)


def _certify_point(k, tokens, theta, rho, cls, opts) -> SweepRow:
    vals = parse_ratio_template(list(tokens), theta)
    names = tuple(t.replace("theta", "θ") for t in tokens)
    sys = build_bdf_system(RatioGrid(k, vals, theta, names))
    idx = next((i for i, t in enumerate(tokens) if t.replace("θ", "theta") == "theta"), None)
    loop = _theta_loop(sys, "C(" + ",".join([names[idx]] * (k - 1)) + ")") if idx is not None else None
    if loop is None:
        return SweepRow(theta, rho, cls, "eigenvalue_only", note="no all-theta loop in the grid")
    cand = candidate_from_cycle(sys, (loop.id,))
    try:
        out = run_invariant_polytope(sys, cand, opts)
    except ValueError as exc:
        return SweepRow(theta, rho, cls, "eigenvalue_only", note=str(exc))
    if isinstance(out, Converged):
        verdict = "zero_stable" if out.rho < 1 else "not_zero_stable"
        return SweepRow(theta, rho, cls, verdict, out.rho, out.rho, "certified")
    if rho >= 1:
        return SweepRow(theta, rho, cls, "not_zero_stable", rho, getattr(out, "upper", None), "candidate radius >= 1")
    lower = getattr(out, "lower", rho)
    upper = getattr(out, "upper", None)
    return SweepRow(theta, rho, cls, "bracket", lower, upper, getattr(out, "reason", out.kind))
