"""Linear systems on multigraphs: the model, path products, brute-force bounds and file I/O.

A system is a directed multigraph whose vertices carry real vector spaces
``R^{d_i}`` and whose edges carry matrices mapping the space of the tail
vertex into the space of the head vertex (shape ``d_to x d_from``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import jsonschema
import numpy as np

__all__ = [
    "Vertex",
    "Edge",
    "MultigraphSystem",
    "BoundsBracket",
    "SystemFormatError",
    "PathError",
    "PathCapExceeded",
    "load_system",
    "loads_system",
    "dump_system",
    "save_system",
    "system_from_dict",
    "system_to_dict",
    "product_along_path",
    "path_endpoints",
    "operator_norm",
    "spectral_radius",
    "brute_force_bounds",
    "brute_force_lsr_bounds",
]

DEFAULT_PATH_CAP = 10**7


class SystemFormatError(ValueError):
    """The system document or constructor arguments violate the schema."""


class PathError(ValueError):
    """A path is not valid on the given system."""


class PathCapExceeded(RuntimeError):
    """Exhaustive enumeration would exceed the configured path count cap."""


@dataclass(frozen=True)
class Vertex:
    id: str
    dim: int


@dataclass(frozen=True, eq=False)
class Edge:
    id: str
    source: str
    target: str
    label: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.ndim != 2:
            raise SystemFormatError(f"edge {self.id!r}: matrix must be two-dimensional")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class MultigraphSystem:
    """The triplet (G, L, A): vertex spaces plus matrix-labelled edges.

    Immutable after construction; edge matrices are read-only arrays.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.vertices:
            raise SystemFormatError("a system needs at least one vertex")
        dims = {}
        for v in self.vertices:
            if v.id in dims:
                raise SystemFormatError(f"duplicate vertex id {v.id!r}")
            if int(v.dim) != v.dim or v.dim < 1:
                raise SystemFormatError(f"vertex {v.id!r}: dim must be a positive integer, got {v.dim!r}")
            dims[v.id] = v.dim
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise SystemFormatError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            for end in (e.source, e.target):
                if end not in dims:
                    raise SystemFormatError(f"edge {e.id!r}: unknown vertex {end!r}")
            expected = (dims[e.target], dims[e.source])
            if e.matrix.shape != expected:
                raise SystemFormatError(
                    f"edge {e.id!r}: matrix shape {e.matrix.shape} does not match "
                    f"dims {e.target}:{expected[0]} x {e.source}:{expected[1]}"
                )
            if not np.all(np.isfinite(e.matrix)):
                raise SystemFormatError(f"edge {e.id!r}: non-finite matrix entry")

    # -- lookup helpers -------------------------------------------------
    @cached_property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    @cached_property
    def _dims(self) -> dict[str, int]:
        return {v.id: v.dim for v in self.vertices}

    @cached_property
    def _edges_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _out(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertex_ids}
        for e in self.edges:
            out[e.source].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def _in(self) -> dict[str, tuple[Edge, ...]]:
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertex_ids}
        for e in self.edges:
            inc[e.target].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    def dim(self, vertex_id: str) -> int:
        return self._dims[vertex_id]

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges_by_id[edge_id]
        except KeyError:
            raise PathError(f"unknown edge {edge_id!r}") from None

    def out_edges(self, vertex_id: str) -> tuple[Edge, ...]:
        return self._out[vertex_id]

    def in_edges(self, vertex_id: str) -> tuple[Edge, ...]:
        return self._in[vertex_id]

    @property
    def total_dim(self) -> int:
        return sum(v.dim for v in self.vertices)

    def is_nonnegative(self) -> bool:
        return all(np.all(e.matrix >= 0) for e in self.edges)

    def scaled(self, factor: float) -> "MultigraphSystem":
        """Copy with every edge matrix multiplied by ``factor``."""
        return self.with_matrices({e.id: factor * e.matrix for e in self.edges})

    def with_matrices(self, matrices: Mapping[str, np.ndarray]) -> "MultigraphSystem":
        edges = [Edge(e.id, e.source, e.target, e.label, matrices.get(e.id, e.matrix)) for e in self.edges]
        return MultigraphSystem(self.vertices, tuple(edges))

    def __repr__(self):
        return f"MultigraphSystem(n={len(self.vertices)}, edges={len(self.edges)}, dims={list(self._dims.values())})"


# ---------------------------------------------------------------------------
# File format

_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["vertices", "edges"],
    "properties": {
        "vertices": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "dim"],
                "properties": {"id": {"type": "string"}, "dim": {"type": "integer"}},
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "from", "to", "label", "matrix"],
                "properties": {
                    "id": {"type": "string"},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "label": {"type": "string"},
                    "matrix": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                    },
                },
            },
        },
    },
}


def _where(error: jsonschema.ValidationError, doc) -> str:
    path = list(error.absolute_path)
    if len(path) >= 2 and path[0] in ("vertices", "edges"):
        try:
            ident = doc[path[0]][path[1]].get("id")
        except (AttributeError, IndexError, KeyError, TypeError):
            ident = None
        kind = "vertex" if path[0] == "vertices" else "edge"
        if ident is not None:
            return f"{kind} {ident!r}"
        return f"{kind} #{path[1]}"
    return "/".join(map(str, path)) or "document"


def system_from_dict(doc) -> MultigraphSystem:
    try:
        jsonschema.validate(doc, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SystemFormatError(f"{_where(exc, doc)}: {exc.message}") from None
    vertices = []
    for v in doc["vertices"]:
        if v["dim"] < 1:
            raise SystemFormatError(f"vertex {v['id']!r}: dim must be >= 1 (prune zero-dimensional vertices)")
        vertices.append(Vertex(v["id"], int(v["dim"])))
    edges = []
    for e in doc["edges"]:
        rows = e["matrix"]
        if len({len(r) for r in rows}) != 1:
            raise SystemFormatError(f"edge {e['id']!r}: ragged matrix rows")
        edges.append(Edge(e["id"], e["from"], e["to"], e["label"], np.array(rows, dtype=float)))
    return MultigraphSystem(tuple(vertices), tuple(edges))


def system_to_dict(sys: MultigraphSystem) -> dict:
    return {
        "vertices": [{"id": v.id, "dim": v.dim} for v in sys.vertices],
        "edges": [
            {
                "id": e.id,
                "from": e.source,
                "to": e.target,
                "label": e.label,
                "matrix": [[float(x) for x in row] for row in e.matrix],
            }
            for e in sys.edges
        ],
    }


def loads_system(text: str) -> MultigraphSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(f"not valid JSON: {exc}") from None
    return system_from_dict(doc)


def load_system(path) -> MultigraphSystem:
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read())


def dump_system(sys: MultigraphSystem) -> str:
    # float repr is the shortest round-tripping decimal, so reload is bit-exact
    return json.dumps(system_to_dict(sys), indent=1)


def save_system(sys: MultigraphSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_system(sys) + "\n")


# ---------------------------------------------------------------------------
# Paths and products


def path_endpoints(sys: MultigraphSystem, path: Sequence[str], anchor: str | None = None) -> tuple[str, str]:
    """Start and end vertex of ``path``; validates incidence."""
    if not path:
        if anchor is None:
            raise PathError("empty path needs an anchor vertex")
        if anchor not in sys.vertex_ids:
            raise PathError(f"unknown anchor vertex {anchor!r}")
        return anchor, anchor
    edges = [sys.edge(eid) for eid in path]
    for a, b in zip(edges, edges[1:]):
        if a.target != b.source:
            raise PathError(f"edges {a.id!r} -> {b.id!r} are not incident ({a.target} != {b.source})")
    if anchor is not None and anchor != edges[0].source:
        raise PathError(f"path starts at {edges[0].source!r}, not at anchor {anchor!r}")
    return edges[0].source, edges[-1].target


def product_along_path(sys: MultigraphSystem, path: Sequence[str], anchor: str | None = None) -> np.ndarray:
    """Product ``A_k ... A_1`` of the edge matrices along ``path`` (first edge applied first)."""
    start, _ = path_endpoints(sys, path, anchor)
    prod = np.eye(sys.dim(start))
    for eid in path:
        prod = sys.edge(eid).matrix @ prod
    return prod


def operator_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("operator_norm: non-finite entries")
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def spectral_radius(m) -> float:
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


# ---------------------------------------------------------------------------
# Brute-force bounds


@dataclass(frozen=True)
class BoundsBracket:
    lower: float
    upper: float
    k_used: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"inconsistent bracket [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _levels(sys: MultigraphSystem, k_max: int, cap: int) -> Iterable[tuple[int, dict[tuple[str, str], np.ndarray]]]:
    """Yield, per length k, all path products grouped by (start, end) as stacked arrays.

    The level-by-level batch layout is a breadth-first form of the exhaustive
    depth-first traversal: every path of length k appears exactly once.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    level = {(v.id, v.id): np.eye(v.dim)[None, :, :] for v in sys.vertices}
    total = 0
    for k in range(1, k_max + 1):
        nxt: dict[tuple[str, str], list[np.ndarray]] = {}
        count = sum(len(arr) * len(sys.out_edges(end)) for (_, end), arr in level.items())
        total += count
        if total > cap:
            raise PathCapExceeded(f"path enumeration up to length {k} needs {total} paths (cap {cap})")
        for (start, end), arr in level.items():
            for e in sys.out_edges(end):
                nxt.setdefault((start, e.target), []).append(np.matmul(e.matrix, arr))
        level = {key: np.concatenate(parts) for key, parts in nxt.items() if parts}
        yield k, level


def brute_force_bounds(sys: MultigraphSystem, k_max: int, cap: int = DEFAULT_PATH_CAP) -> BoundsBracket:
    """Double inequality bracket from exhaustive enumeration of paths up to length ``k_max``.

    lower = max over closed paths of rho(P)^(1/|P|); upper = min over k of
    (max over paths of length k of ||P||_2)^(1/k).
    """
    lower = 0.0
    upper = np.inf
    for k, level in _levels(sys, k_max, cap):
        max_norm = 0.0
        for (start, end), arr in level.items():
            if arr.shape[1] and arr.shape[2]:
                max_norm = max(max_norm, float(np.max(np.linalg.norm(arr, ord=2, axis=(1, 2)))))
            if start == end:
                rho = float(np.max(np.abs(np.linalg.eigvals(arr))))
                lower = max(lower, rho ** (1.0 / k))
        upper = min(upper, max_norm ** (1.0 / k))
    if not np.isfinite(upper):
        upper = 0.0
    return BoundsBracket(lower, max(upper, lower), k_max)


def _min_gain(arr: np.ndarray) -> np.ndarray:
    """inf over unit x of ||M x|| for each stacked M (0 when M cannot be injective)."""
    rows, cols = arr.shape[1], arr.shape[2]
    if rows < cols:
        return np.zeros(len(arr))
    return np.linalg.svd(arr, compute_uv=False)[:, -1]


def brute_force_lsr_bounds(sys: MultigraphSystem, k_max: int, cap: int = DEFAULT_PATH_CAP) -> BoundsBracket:
    """Bracket for the lower spectral radius from paths up to length ``k_max``.

    upper = min over closed paths of rho(P)^(1/|P|) (powers of a closed path are
    admissible); lower = max over k of (min over paths of length k of the
    smallest gain of P)^(1/k), valid because gains are supermultiplicative.
    Raises ValueError for graphs without closed paths of length <= k_max.
    """
    lower = 0.0
    upper = np.inf
    for k, level in _levels(sys, k_max, cap):
        min_gain = np.inf
        for (start, end), arr in level.items():
            min_gain = min(min_gain, float(np.min(_min_gain(arr))))
            if start == end:
                rho = float(np.min(np.max(np.abs(np.linalg.eigvals(arr)), axis=1)))
                upper = min(upper, rho ** (1.0 / k))
        if np.isfinite(min_gain):
            lower = max(lower, min_gain ** (1.0 / k))
    if not np.isfinite(upper):
        raise ValueError(f"no closed path of length <= {k_max}: lower spectral radius undefined")
    return BoundsBracket(min(lower, upper), upper, k_max)
