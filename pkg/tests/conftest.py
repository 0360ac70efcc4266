import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from scd.graph import Graph

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def two_triangles() -> Graph:
    return Graph(6, [0, 1, 0, 3, 4, 3], [1, 2, 2, 4, 5, 5])


def random_graph(seed: int, n: int, p: float, weighted: bool = False) -> Graph:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    w = rng.uniform(0.5, 3.0, keep.sum()) if weighted else None
    return Graph(n, iu[keep], ju[keep], w)


@st.composite
def graphs(draw, min_nodes=2, max_nodes=30, weighted=None, min_edges=1):
    n = draw(st.integers(min_nodes, max_nodes))
    p = draw(st.floats(0.05, 0.9))
    seed = draw(st.integers(0, 2**31 - 1))
    w = draw(st.booleans()) if weighted is None else weighted
    g = random_graph(seed, n, p, w)
    if g.n_edges < min_edges:
        g = Graph(n, np.concatenate([g.edges[:, 0], [0]]), np.concatenate([g.edges[:, 1], [1]]),
                  np.concatenate([g.weights, [1.0]]))
    return g


@pytest.fixture
def triangles():
    return two_triangles()
