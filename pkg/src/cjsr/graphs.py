"""Graph-level tools: strong components, cycle enumeration, vertex identification."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import networkx as nx
import numpy as np

from .system import Edge, MultigraphSystem

__all__ = [
    "SccDecomposition",
    "CycleCapExceeded",
    "strongly_connected_components",
    "is_strongly_connected",
    "induced_subsystem",
    "enumerate_simple_cycles",
    "iter_cycle_batches",
    "sorted_edge_ids",
    "canonical_rotation",
    "is_primitive",
    "identify_vertices",
]

DEFAULT_CYCLE_CAP = 10**6
MATRIX_MATCH_TOL = 1e-12


class CycleCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SccDecomposition:
    """Strong components in sink-first order.

    Every edge between two different components goes from a component with a
    larger index to one with a smaller index, so component ``i`` is never
    reachable from component ``j`` when ``i > j``.
    """

    components: tuple[tuple[str, ...], ...]
    subsystems: tuple[MultigraphSystem, ...]
    cross_edges: tuple[str, ...]

    def component_of(self, vertex_id: str) -> int:
        for idx, comp in enumerate(self.components):
            if vertex_id in comp:
                return idx
        raise KeyError(vertex_id)


def _digraph(sys: MultigraphSystem) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sys.vertex_ids)
    g.add_edges_from((e.source, e.target) for e in sys.edges)
    return g


def induced_subsystem(sys: MultigraphSystem, vertex_ids) -> MultigraphSystem:
    keep = set(vertex_ids)
    verts = tuple(v for v in sys.vertices if v.id in keep)
    edges = tuple(e for e in sys.edges if e.source in keep and e.target in keep)
    return MultigraphSystem(verts, edges)


def strongly_connected_components(sys: MultigraphSystem) -> SccDecomposition:
    order = {v: i for i, v in enumerate(sys.vertex_ids)}
    cond = nx.condensation(_digraph(sys))
    members = {c: sorted(cond.nodes[c]["members"], key=order.__getitem__) for c in cond.nodes}
    topo = list(nx.lexicographical_topological_sort(cond, key=lambda c: order[members[c][0]]))
    topo.reverse()  # sinks first
    comps = tuple(tuple(members[c]) for c in topo)
    subs = tuple(induced_subsystem(sys, comp) for comp in comps)
    where = {v: i for i, comp in enumerate(comps) for v in comp}
    cross = tuple(e.id for e in sys.edges if where[e.source] != where[e.target])
    return SccDecomposition(comps, subs, cross)


def is_strongly_connected(sys: MultigraphSystem) -> bool:
    return nx.is_strongly_connected(_digraph(sys))


# ---------------------------------------------------------------------------
# Cycles
#
# A cycle is stored as its canonical rotation, the lexicographically smallest
# rotation of its edge-id sequence.  Closed walks that are canonical and not a
# power of a shorter walk are exactly the sequences that compare strictly
# smaller than every proper rotation (Lyndon words over the edge order), which
# lets the filter run vectorized over whole batches of walks.


def canonical_rotation(cycle) -> tuple[str, ...]:
    cycle = tuple(cycle)
    if not cycle:
        return cycle
    return min(cycle[r:] + cycle[:r] for r in range(len(cycle)))


def is_primitive(cycle) -> bool:
    cycle = tuple(cycle)
    n = len(cycle)
    return all(cycle[r:] + cycle[:r] != cycle for r in range(1, n))


def _lyndon_mask(seqs: np.ndarray) -> np.ndarray:
    n, k = seqs.shape
    keep = np.ones(n, dtype=bool)
    for r in range(1, k):
        rot = np.roll(seqs, -r, axis=1)
        diff = seqs != rot
        has = diff.any(axis=1)
        first = diff.argmax(axis=1)
        rows = np.arange(n)
        smaller = seqs[rows, first] < rot[rows, first]
        keep &= has & smaller
    return keep


def iter_cycle_batches(
    sys: MultigraphSystem, l0: int, cap: int = DEFAULT_CYCLE_CAP, with_products: bool = True
) -> Iterator[tuple[np.ndarray, np.ndarray | None, str]]:
    """Yield batches ``(ranks, products, start_vertex)`` of canonical primitive cycles.

    ``ranks`` is an ``(N, k)`` integer array indexing ``sorted_edge_ids(sys)``;
    ``products`` holds the corresponding cycle products (first edge applied first).
    """
    if l0 < 1:
        raise ValueError("l0 must be >= 1")
    ids = sorted_edge_ids(sys)
    edges = [sys.edge(eid) for eid in ids]
    out_by_vertex: dict[str, list[tuple[int, Edge]]] = {v: [] for v in sys.vertex_ids}
    for r, e in enumerate(edges):
        out_by_vertex[e.source].append((r, e))
    found = 0
    walked = 0
    walk_cap = 20 * cap
    for r0, e0 in enumerate(edges):
        start = e0.source
        # frontier grouped by end vertex: (rank sequences, products)
        frontier = {
            e0.target: (
                np.array([[r0]], dtype=np.int64),
                e0.matrix[None, :, :] if with_products else None,
            )
        }
        for k in range(1, l0 + 1):
            if k > 1:
                nxt: dict[str, tuple[list, list]] = {}
                for end, (seqs, prods) in frontier.items():
                    for r, e in out_by_vertex[end]:
                        if r < r0:
                            continue
                        walked += len(seqs)
                        col = np.full((len(seqs), 1), r, dtype=np.int64)
                        bucket = nxt.setdefault(e.target, ([], []))
                        bucket[0].append(np.hstack([seqs, col]))
                        if with_products:
                            bucket[1].append(np.matmul(e.matrix, prods))
                if walked > walk_cap:
                    raise CycleCapExceeded(f"cycle search up to length {l0} walks more than {walk_cap} paths")
                frontier = {
                    v: (np.concatenate(s), np.concatenate(p) if with_products else None)
                    for v, (s, p) in nxt.items()
                }
                if not frontier:
                    break
            closed = frontier.get(start)
            if closed is None:
                continue
            seqs, prods = closed
            mask = _lyndon_mask(seqs)
            if not mask.any():
                continue
            found += int(mask.sum())
            if found > cap:
                raise CycleCapExceeded(f"more than {cap} cycles of length <= {l0}")
            yield seqs[mask], (prods[mask] if with_products else None), start


def sorted_edge_ids(sys: MultigraphSystem) -> tuple[str, ...]:
    return tuple(sorted(e.id for e in sys.edges))


def enumerate_simple_cycles(sys: MultigraphSystem, l0: int, cap: int = DEFAULT_CYCLE_CAP) -> list[tuple[str, ...]]:
    """All closed edge paths of length <= l0 that are not powers, one per rotation class.

    Each cycle is returned in canonical rotation; the list is sorted by length and
    then lexicographically.
    """
    ids = sorted_edge_ids(sys)
    cycles = []
    for seqs, _, _ in iter_cycle_batches(sys, l0, cap, with_products=False):
        cycles.extend(tuple(ids[r] for r in row) for row in seqs.tolist())
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


# ---------------------------------------------------------------------------
# Vertex identification


def _same_outgoing(a: tuple[Edge, ...], b: tuple[Edge, ...], tol: float) -> bool:
    if len(a) != len(b):
        return False
    unused = list(b)
    for ea in a:
        for idx, eb in enumerate(unused):
            if ea.target == eb.target and np.max(np.abs(ea.matrix - eb.matrix), initial=0.0) <= tol:
                del unused[idx]
                break
        else:
            return False
    return True


def identify_vertices(sys: MultigraphSystem, tol: float = MATRIX_MATCH_TOL) -> MultigraphSystem:
    """Merge vertices with equal dimension and identical outgoing edges, to a fixpoint.

    Merging ``i2`` into ``i1`` drops the out-edges of ``i2`` and redirects its
    in-edges to ``i1``.  Only the identity basis pairing is tried.  Each pass
    merges every class of mutually matching vertices into its first member.
    """
    vertices = list(sys.vertices)
    edges = list(sys.edges)
    while True:
        out: dict[str, list[Edge]] = {v.id: [] for v in vertices}
        for e in edges:
            out[e.source].append(e)
        into: dict[str, str] = {}
        for a_idx, va in enumerate(vertices):
            if va.id in into:
                continue
            for vb in vertices[a_idx + 1 :]:
                if vb.id in into or va.dim != vb.dim:
                    continue
                if _same_outgoing(tuple(out[va.id]), tuple(out[vb.id]), tol):
                    into[vb.id] = va.id
        if not into:
            break
        edges = [
            Edge(e.id, e.source, into.get(e.target, e.target), e.label, e.matrix)
            for e in edges
            if e.source not in into
        ]
        vertices = [v for v in vertices if v.id not in into]
    if len(vertices) == len(sys.vertices):
        return sys
    return MultigraphSystem(tuple(vertices), tuple(edges))
