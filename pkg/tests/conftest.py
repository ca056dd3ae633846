import numpy as np
import pytest

from cjsr import load_fixture
from cjsr.system import Edge, MultigraphSystem, Vertex


def one_vertex(*matrices, dim=None, vid="L"):
    """Single-vertex system with one loop per matrix, edge ids A1, A2, ..."""
    mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in matrices]
    d = dim or mats[0].shape[0]
    edges = tuple(Edge(f"A{k + 1}", vid, vid, f"A{k + 1}", M) for k, M in enumerate(mats))
    return MultigraphSystem((Vertex(vid, d),), edges)


@pytest.fixture(scope="session")
def ex2():
    return load_fixture("example2")


@pytest.fixture(scope="session")
def ex2_free():
    return load_fixture("example2_unconstrained")


@pytest.fixture(scope="session")
def ex3():
    return load_fixture("example3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
