import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pebblex.generators import random_bipartite_graph, random_graph
from pebblex.graph import PortLabeledGraph, build_graph

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def path3() -> PortLabeledGraph:
    """a-b-c as 0-1-2; a:0->b, b:0->a, b:1->c, c:0->b."""
    return build_graph([(0, 1, 0, 0), (1, 2, 1, 0)], 3)


def edge() -> PortLabeledGraph:
    return build_graph([(0, 1, 0, 0)], 2)


def star(leaves: int) -> PortLabeledGraph:
    return build_graph([(0, i + 1, i, 0) for i in range(leaves)], leaves + 1)


def cycle4() -> PortLabeledGraph:
    # 0-1-2-3-0, port 0 clockwise at every node
    return build_graph([(0, 1, 0, 1), (1, 2, 0, 1), (2, 3, 0, 1), (3, 0, 0, 1)], 4)


def triangle() -> PortLabeledGraph:
    return build_graph([(0, 1, 0, 1), (1, 2, 0, 1), (2, 0, 0, 1)], 3)


@st.composite
def graphs(draw, n_min: int = 2, n_max: int = 8) -> PortLabeledGraph:
    n = draw(st.integers(n_min, n_max))
    extra = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(n, extra, random.Random(seed))


@st.composite
def bipartite_graphs(draw, n_min: int = 2, n_max: int = 8) -> PortLabeledGraph:
    n = draw(st.integers(n_min, n_max))
    extra = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_bipartite_graph(n, extra, random.Random(seed))


@st.composite
def graph_with_pair(draw, n_min: int = 2, n_max: int = 8):
    g = draw(graphs(n_min, n_max))
    a = draw(st.integers(0, g.n - 1))
    b = draw(st.integers(0, g.n - 2))
    if b >= a:
        b += 1
    return g, a, b


@pytest.fixture
def p3() -> PortLabeledGraph:
    return path3()
