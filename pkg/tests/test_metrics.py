import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scd.graph import Graph, Partition
from scd.metrics import ari, evaluate, modularity, nmi

from conftest import graphs, two_triangles


def naive_modularity(g, labels):
    A = g.adjacency.toarray()
    k = A.sum(axis=1)
    two_m = A.sum()
    q = 0.0
    for v in range(g.n_nodes):
        for w in range(g.n_nodes):
            if labels[v] == labels[w]:
                q += A[v, w] - k[v] * k[w] / two_m
    return q / two_m


def naive_ari(y, c):
    """Pair counting over all n(n-1)/2 pairs."""
    pairs = list(itertools.combinations(range(len(y)), 2))
    same_y = np.array([y[i] == y[j] for i, j in pairs])
    same_c = np.array([c[i] == c[j] for i, j in pairs])
    index = np.sum(same_y & same_c)
    expected = same_y.sum() * same_c.sum() / len(pairs)
    top = (same_y.sum() + same_c.sum()) / 2
    return 1.0 if top == expected else (index - expected) / (top - expected)


def test_nmi_examples():
    assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert nmi([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert nmi([0, 0, 0], [0, 1, 1]) == 0.0


def test_ari_examples():
    assert ari([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5


def test_length_mismatch():
    with pytest.raises(ValueError):
        nmi([0, 1], [0, 1, 1])
    with pytest.raises(ValueError):
        ari([0, 1], [0])


def test_nmi_permutation_invariance_randomized():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        y = rng.integers(0, int(rng.integers(1, 8)), n)
        c = rng.integers(0, int(rng.integers(1, 8)), n)
        base = nmi(y, c)
        perm = rng.permutation(n)
        relabel_y, relabel_c = rng.permutation(8), rng.permutation(8)
        assert nmi(relabel_y[y][perm], relabel_c[c][perm]) == base
        assert nmi(c, y) == base
        assert 0.0 <= base <= 1.0


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=2, max_size=30))
def test_ari_matches_pair_counting(pairs):
    y, c = map(np.array, zip(*pairs))
    assert ari(y, c) == pytest.approx(naive_ari(y, c), abs=1e-12)
    perm = np.random.default_rng(len(y)).permutation(len(y))
    assert ari((y * 3 + 1)[perm], c[perm]) == pytest.approx(ari(y, c), abs=1e-12)
    assert -1.0 <= ari(y, c) <= 1.0


def test_ari_chance_level():
    rng = np.random.default_rng(1)
    vals = [ari(rng.integers(0, 5, 100), rng.integers(0, 5, 100)) for _ in range(1000)]
    assert abs(np.mean(vals)) <= 0.02


def test_modularity_examples():
    g = two_triangles()
    assert modularity(g, [0, 0, 0, 1, 1, 1]) == 0.5
    assert abs(modularity(g, [0] * 6)) <= 1e-12
    tri = Graph(3, [0, 1, 0], [1, 2, 2])
    assert modularity(tri, [0, 1, 2]) == pytest.approx(-1 / 3, abs=1e-15)


def test_modularity_edgeless():
    with pytest.raises(ValueError):
        modularity(Graph(3, [], []), [0, 1, 2])


def test_modularity_against_double_sum():
    rng = np.random.default_rng(2)
    for trial in range(50):
        n = int(rng.integers(2, 101))
        iu, ju = np.triu_indices(n, 1)
        keep = rng.random(len(iu)) < rng.uniform(0.02, 0.5)
        keep[0] = True
        w = rng.uniform(0.1, 5.0, keep.sum()) if trial % 2 else None
        g = Graph(n, iu[keep], ju[keep], w)
        labels = rng.integers(0, int(rng.integers(1, 10)), n)
        assert abs(modularity(g, labels) - naive_modularity(g, labels)) <= 1e-9


@given(graphs())
def test_modularity_single_community_zero(g):
    assert abs(modularity(g, np.zeros(g.n_nodes, dtype=int))) <= 1e-12


@given(graphs())
def test_modularity_range(g):
    labels = np.random.default_rng(g.n_nodes).integers(0, 4, g.n_nodes)
    assert -0.5 <= modularity(g, labels) <= 1.0


def test_evaluate_records():
    g = two_triangles()
    truth = Partition([0, 0, 0, 1, 1, 1])
    s = evaluate(g, truth, truth)
    assert s.records() == [("nmi", 1.0), ("ari", 1.0), ("modularity", 0.5)]
    assert evaluate(g, truth).records() == [("modularity", 0.5)]
