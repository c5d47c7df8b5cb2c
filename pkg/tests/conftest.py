import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from usermatch.graph import build_graph
from usermatch.links import LinkSet

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def small_graphs(draw, max_n=30, max_m=80, loops=True):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    ids = st.integers(0, n - 1)
    edges = draw(st.lists(st.tuples(ids, ids), min_size=m, max_size=m))
    if not loops:
        edges = [e for e in edges if e[0] != e[1]]
    return build_graph(n, edges)


def random_links(rng: np.random.Generator, n1: int, n2: int, size: int) -> LinkSet:
    size = min(size, n1, n2)
    return LinkSet(rng.choice(n1, size, replace=False), rng.choice(n2, size, replace=False))


@pytest.fixture
def star():
    # center 0, leaves 1..4, identical in both copies
    return build_graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def path3():
    return build_graph(3, [(0, 1), (1, 2)])


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
