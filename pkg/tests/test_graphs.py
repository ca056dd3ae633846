import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cjsr.compilers import WordConstraint, compile_forbidden_words, compile_markovian
from cjsr.generators import random_strongly_connected
from cjsr.graphs import (
    CycleCapExceeded,
    canonical_rotation,
    enumerate_simple_cycles,
    identify_vertices,
    is_strongly_connected,
    strongly_connected_components,
)
from cjsr.system import Edge, MultigraphSystem, Vertex, brute_force_bounds

from conftest import one_vertex


def _chain():
    return MultigraphSystem(
        (Vertex("1", 1), Vertex("2", 1)),
        (Edge("a", "1", "2", "A", [[1.0]]), Edge("l1", "1", "1", "B", [[0.5]]), Edge("l2", "2", "2", "C", [[2.0]])),
    )


def _example1(rng, forbidden):
    mats = [rng.standard_normal((2, 2)) for _ in range(2)]
    return compile_forbidden_words(WordConstraint(mats, forbidden))


def test_single_vertex_one_component():
    scc = strongly_connected_components(one_vertex(np.eye(2), 2 * np.eye(2)))
    assert scc.components == (("L",),)


def test_cross_edges_point_to_earlier_components():
    scc = strongly_connected_components(_chain())
    assert scc.components == (("2",), ("1",))
    assert scc.cross_edges == ("a",)
    for eid in scc.cross_edges:
        e = _chain().edge(eid)
        assert scc.component_of(e.source) > scc.component_of(e.target)


def test_components_partition(rng):
    s = _example1(rng, ["121"])
    scc = strongly_connected_components(s)
    flat = [v for c in scc.components for v in c]
    assert sorted(flat) == sorted(s.vertex_ids)


def test_condensation_bracket_matches_whole(rng):
    s = _example1(rng, ["121"])
    scc = strongly_connected_components(s)
    whole = brute_force_bounds(s, 8)
    parts = [brute_force_bounds(sub, 8) for sub in scc.subsystems if sub.edges]
    assert max(p.lower for p in parts) == pytest.approx(whole.lower, abs=1e-9)


def test_reducible_chain_bracket():
    s = _chain()
    parts = [brute_force_bounds(sub, 8).lower for sub in strongly_connected_components(s).subsystems]
    assert max(parts) == pytest.approx(brute_force_bounds(s, 8).lower, abs=1e-12)


def test_power_exclusion():
    assert enumerate_simple_cycles(one_vertex(np.eye(1)), 3) == [("A1",)]


def test_parallel_loops_rotations():
    cycles = enumerate_simple_cycles(one_vertex(np.eye(1), np.eye(1)), 2)
    assert cycles == [("A1",), ("A2",), ("A1", "A2")]


def test_g2_cycles(rng):
    s = _example1(rng, ["121", "11"])
    cycles = enumerate_simple_cycles(s, 4)
    assert ("A2A2>A2A2",) in cycles
    three = canonical_rotation(("A2A2>A1A2", "A1A2>A2A1", "A2A1>A2A2"))
    assert three in cycles


def _oracle_cycles(sys, l0):
    out = set()
    for k in range(1, l0 + 1):
        for start in sys.vertex_ids:
            stack = [(start, ())]
            while stack:
                here, p = stack.pop()
                if len(p) == k:
                    if here == start:
                        prim = all(p != p[i:] + p[:i] for i in range(1, k) if k % i == 0)
                        if prim:
                            out.add(canonical_rotation(p))
                    continue
                for e in sys.out_edges(here):
                    stack.append((e.target, p + (e.id,)))
    return sorted(out, key=lambda c: (len(c), c))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_cycles_match_exhaustive_oracle(seed, l0):
    s = random_strongly_connected(np.random.default_rng(seed), n_vertices=(1, 3), dims=(1, 1), p_extra=0.4)
    assert enumerate_simple_cycles(s, l0) == _oracle_cycles(s, l0)


def test_cycle_cap():
    with pytest.raises(CycleCapExceeded):
        enumerate_simple_cycles(one_vertex(*[np.eye(1)] * 4), 8, cap=100)


def test_markovian_identifies_to_one_vertex(rng):
    mats = [rng.standard_normal((2, 2)) for _ in range(2)]
    s = identify_vertices(compile_markovian(mats))
    assert len(s.vertices) == 1 and len(s.edges) == 2
    assert all(e.source == e.target for e in s.edges)


def test_identification_respects_dimension():
    s = MultigraphSystem(
        (Vertex("a", 1), Vertex("b", 2)),
        (Edge("x", "a", "b", "X", [[1.0], [0.0]]), Edge("y", "b", "a", "Y", [[1.0, 0.0]])),
    )
    assert len(identify_vertices(s).vertices) == 2


def test_identification_needs_equal_matrices():
    s = MultigraphSystem(
        (Vertex("a", 1), Vertex("b", 1)),
        (Edge("x", "a", "b", "X", [[1.0]]), Edge("y", "b", "a", "Y", [[2.0]])),
    )
    assert len(identify_vertices(s).vertices) == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_identification_preserves_bracket(seed):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((2, 2)) for _ in range(3)]
    pairs = {(int(j), int(i)) for j, i in rng.integers(1, 4, size=(2, 2))}
    s = compile_markovian(mats, pairs)
    t = identify_vertices(s)
    if not s.edges:
        return
    a, b = brute_force_bounds(s, 6), brute_force_bounds(t, 6)
    assert a.lower == pytest.approx(b.lower, abs=1e-9)
    assert a.upper == pytest.approx(b.upper, abs=1e-9)


def test_strongly_connected_flag(ex2):
    assert is_strongly_connected(ex2)
    assert not is_strongly_connected(_chain())


def test_rotation_helper():
    for p in itertools.permutations("abc"):
        assert canonical_rotation(p) in {("a", "b", "c"), ("a", "c", "b")}
