import numpy as np
import pytest

from dyndowker.graph import WeightedDigraph


def star_graph() -> WeightedDigraph:
    """Three leaves pointing at one sink with weights .1, .2, .3."""
    return WeightedDigraph.from_edges([(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)], node_count=5)


def random_weighted(rng: np.random.Generator, n: int, e: int, levels=None) -> WeightedDigraph:
    """Random simple digraph; ``levels`` quantises weights to force ties."""
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    idx = rng.choice(len(pairs), size=min(e, len(pairs)), replace=False)
    w = rng.random(len(idx))
    if levels:
        w = np.round(w * levels) / levels
    return WeightedDigraph.from_edges([(pairs[i][0], pairs[i][1], float(x)) for i, x in zip(idx, w)],
                                      node_count=n)


@pytest.fixture
def star():
    return star_graph()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k[1:])):
        terminalreporter.write_line(RESULTS[key])
