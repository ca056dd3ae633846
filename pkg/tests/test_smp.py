import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cjsr.generators import random_strongly_connected
from cjsr.graphs import canonical_rotation, enumerate_simple_cycles
from cjsr.smp import (
    NoCycles,
    SmpCandidate,
    candidate_from_cycle,
    check_dominance,
    find_candidate_smp,
    find_candidate_smp_min,
    leading_class,
)
from cjsr.system import (
    Edge,
    MultigraphSystem,
    PathError,
    Vertex,
    brute_force_bounds,
    brute_force_lsr_bounds,
    product_along_path,
    spectral_radius,
)

from conftest import one_vertex


def product_word(sys, cycle):
    """Labels in product order: the last edge applied comes first."""
    return tuple(sys.edge(e).label for e in reversed(cycle))


def is_rotation(word, target):
    return len(word) == len(target) and any(word[i:] + word[:i] == target for i in range(len(word)))


def test_example2_candidate(ex2):
    c = find_candidate_smp(ex2, 10)
    assert isinstance(c, SmpCandidate)
    assert c.length == 7
    assert is_rotation(product_word(ex2, c.cycle), ("A3", "A2", "A3", "A4", "A1", "A4", "A2"))
    assert c.averaged_value == pytest.approx(1.456846, abs=1e-5)
    assert c.leading_class == "real_simple" and not c.tie


def test_example3_candidate(ex3):
    c = find_candidate_smp(ex3, 10)
    assert is_rotation(product_word(ex3, c.cycle), ("A3", "A4", "A4", "A4", "A2"))
    assert c.averaged_value == pytest.approx(1.515717, abs=1e-5)


def test_single_loop_candidate():
    c = find_candidate_smp(one_vertex(np.diag([2.0, 1.0])), 10)
    assert c.cycle == ("A1",) and c.averaged_value == pytest.approx(2.0) and c.leading_class == "real_simple"


def test_min_candidate():
    c = find_candidate_smp_min(one_vertex([[2.0]], [[0.5]]), 10)
    assert c.cycle == ("A2",) and c.averaged_value == pytest.approx(0.5)


def test_acyclic_graph():
    s = MultigraphSystem((Vertex("a", 1), Vertex("b", 1)), (Edge("e", "a", "b", "E", [[1.0]]),))
    assert isinstance(find_candidate_smp(s, 10), NoCycles)
    assert isinstance(find_candidate_smp_min(s, 10), NoCycles)


def test_leading_classes():
    assert leading_class(np.diag([2.0, 1.0])) == "real_simple"
    assert leading_class(np.diag([2.0, -2.0])) == "real_multiple"
    assert leading_class(np.array([[0.0, -1.0], [1.0, 0.0]])) == "complex_pair"


def test_tie_flag():
    c = find_candidate_smp(one_vertex([[1.0, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 1.0]]), 4)
    assert c.tie


def test_parallel_identical_edges_are_not_ties():
    A = np.array([[1.0, 1.0], [0.0, 0.5]])
    c = find_candidate_smp(one_vertex(A, A), 4)
    assert not c.tie and c.length == 1


def test_min_candidate_bounds_lsr_bracket():
    mats = [np.array([[0.9, 0.4], [0.2, 0.7]]), np.array([[0.3, 0.8], [0.6, 0.5]])]
    s = one_vertex(*mats)
    c = find_candidate_smp_min(s, 8)
    br = brute_force_lsr_bounds(s, 8)
    assert c.averaged_value >= br.lower - 1e-12


def test_candidate_from_cycle_checks_path(ex2):
    with pytest.raises(PathError):
        candidate_from_cycle(ex2, ("L1>L2:A3",))
    c = candidate_from_cycle(ex2, ("L1>L1:A1",))
    assert c.averaged_value == pytest.approx(1.0)


def test_dominance_two_loops():
    s = one_vertex([[1.0]], [[0.5]])
    c = find_candidate_smp(s, 4)
    assert check_dominance(s, c, 1).q == pytest.approx(0.5)
    # with longer cycles the mixed word A1^3 A2 is the runner-up
    assert check_dominance(s, c, 4).q == pytest.approx(0.5**0.25)


def test_dominance_example2(ex2):
    assert check_dominance(ex2, find_candidate_smp(ex2, 10), 10).q < 1


def test_dominance_tie():
    s = one_vertex([[1.0, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 1.0]])
    assert check_dominance(s, find_candidate_smp(s, 3), 3).q == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_candidate_is_max_over_cycles(seed):
    s = random_strongly_connected(np.random.default_rng(seed), n_vertices=(1, 3), dims=(1, 2), normalize=False)
    c = find_candidate_smp(s, 5)
    best = max(spectral_radius(product_along_path(s, cyc)) ** (1 / len(cyc)) for cyc in enumerate_simple_cycles(s, 5))
    assert c.averaged_value == pytest.approx(best, rel=1e-12)
    # closed paths up to length 5 cannot beat the best primitive cycle
    assert c.averaged_value == pytest.approx(brute_force_bounds(s, 5).lower, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_search_deterministic(seed):
    s = random_strongly_connected(np.random.default_rng(seed))
    a, b = find_candidate_smp(s, 6), find_candidate_smp(s, 6)
    assert a.cycle == b.cycle and a.averaged_value == b.averaged_value
    assert canonical_rotation(a.cycle) == a.canonical
