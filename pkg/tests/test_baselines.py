import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from scd.baselines import label_propagation, louvain
from scd.graph import Graph, Partition
from scd.lfr import LfrParams, generate_lfr
from scd.metrics import modularity

from conftest import graphs, two_triangles


def all_partitions(n):
    """Every set partition of range(n) as a restricted growth string."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield list(prefix)
            return
        for lab in range(top + 2):
            yield from rec(prefix + [lab], max(top, lab))
    yield from rec([0], 0)


def single_move_gain(g, labels):
    """Largest modularity increase from moving one node to any community or a new one."""
    base = modularity(g, labels)
    best = 0.0
    fresh = labels.max() + 1
    for i in range(g.n_nodes):
        for c in set(labels[g.neighbors(i)].tolist()) | {fresh}:
            if c == labels[i]:
                continue
            trial = labels.copy()
            trial[i] = c
            best = max(best, modularity(g, trial) - base)
    return best


def test_lpa_triangles():
    for seed in range(20):
        assert label_propagation(two_triangles(), rng=seed) == Partition([0, 0, 0, 1, 1, 1])


def test_lpa_edgeless():
    assert label_propagation(Graph(4, [], []), rng=0).n_communities == 4


def test_lpa_complete_graph():
    iu, ju = np.triu_indices(10, 1)
    g = Graph(10, iu, ju)
    for seed in range(50):
        assert label_propagation(g, rng=seed).n_communities == 1


@given(graphs(min_edges=0))
def test_lpa_valid_and_deterministic(g):
    a = label_propagation(g, rng=3)
    assert len(a) == g.n_nodes
    assert a == label_propagation(g, rng=3)
    _, comp = g.components()
    # a community never spans two components
    for c in range(a.n_communities):
        assert len(np.unique(comp[a.labels == c])) == 1


def test_louvain_triangles():
    p = louvain(two_triangles(), rng=0)
    assert p == Partition([0, 0, 0, 1, 1, 1])
    assert modularity(two_triangles(), p) == 0.5


def test_louvain_star():
    g = Graph(6, [0] * 5, [1, 2, 3, 4, 5])
    best = max(all_partitions(6), key=lambda lab: modularity(g, lab))
    assert Partition(best).n_communities == 1
    assert louvain(g, rng=0).n_communities == 1


def test_louvain_edgeless():
    with pytest.raises(ValueError):
        louvain(Graph(3, [], []))


@settings(max_examples=40)
@given(graphs(max_nodes=40))
def test_louvain_beats_trivial_partitions(g):
    p = louvain(g, rng=0)
    q = modularity(g, p)
    assert q >= modularity(g, np.arange(g.n_nodes)) - 1e-12
    assert q >= modularity(g, np.zeros(g.n_nodes, dtype=int)) - 1e-12
    assert p == louvain(g, rng=0)


def test_louvain_single_move_optimum():
    rng = np.random.default_rng(0)
    for trial in range(8):
        n = int(rng.integers(20, 200))
        iu, ju = np.triu_indices(n, 1)
        keep = rng.random(len(iu)) < 6.0 / n
        keep[0] = True
        w = rng.uniform(0.5, 2.0, keep.sum()) if trial % 2 else None
        g = Graph(n, iu[keep], ju[keep], w)
        p = louvain(g, rng=trial)
        assert single_move_gain(g, p.labels) <= 1e-12


def test_louvain_exhaustive_small():
    # on tiny graphs the result should be close to the true optimum
    rng = np.random.default_rng(4)
    for _ in range(10):
        n = 8
        iu, ju = np.triu_indices(n, 1)
        keep = rng.random(len(iu)) < 0.35
        keep[0] = True
        g = Graph(n, iu[keep], ju[keep])
        opt = max(modularity(g, lab) for lab in all_partitions(n))
        assert modularity(g, louvain(g, rng=0)) >= opt - 0.05


def test_louvain_on_planted_graph():
    g, truth = generate_lfr(LfrParams(n=1000, avg_deg=15, max_deg=50, mixing=0.1, seed=0))
    assert modularity(g, louvain(g, rng=0)) >= 0.7
