"""Baseline community detectors: asynchronous label propagation and Louvain."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import kernels
from .graph import Graph, Partition

MAX_LOCAL_PASSES = 1000


def label_propagation(g: Graph, rng=None, max_iter: int = 100) -> Partition:
    """Asynchronous weighted label propagation.

    Every node starts with its own label. Each pass visits nodes in a fresh
    random order; a node keeps its label if it is among the heaviest labels
    around it, otherwise it takes one of those at random. Stops after a pass
    without changes or ``max_iter`` passes.
    """
    rng = np.random.default_rng(rng)
    n = g.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    indptr = g.indptr.astype(np.int64)
    indices = g.indices.astype(np.int64)
    weights = np.asarray(g.data, dtype=np.float64)
    labels = np.arange(n, dtype=np.int64)
    acc = np.full(n, -1.0)
    touched = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        order = rng.permutation(n).astype(np.int64)
        draws = rng.random(n)
        if kernels.lpa_pass(indptr, indices, weights, labels, order, draws, acc, touched) == 0:
            break
    return Partition(labels)


def _local_moving(indptr, indices, weights, deg, comm, two_m, rng):
    n = len(deg)
    tot = np.zeros(n)
    np.add.at(tot, comm, deg)
    size = np.bincount(comm, minlength=n).astype(np.int64)
    empty = np.flatnonzero(size == 0)[::-1].astype(np.int64)
    free = np.zeros(n, dtype=np.int64)
    free[:len(empty)] = empty
    nfree = np.array([len(empty)], dtype=np.int64)
    acc = np.full(n, -1.0)
    touched = np.zeros(n, dtype=np.int64)
    total_moves = 0
    for _ in range(MAX_LOCAL_PASSES):
        order = rng.permutation(n).astype(np.int64)
        moved = kernels.louvain_move(indptr, indices, weights, deg, comm, tot, size, order,
                                     two_m, free, nfree, acc, touched)
        total_moves += moved
        if moved == 0:
            break
    return total_moves


def _csr(adj):
    adj = sp.csr_array(adj)
    adj.sum_duplicates()
    adj.sort_indices()
    return (adj.indptr.astype(np.int64), adj.indices.astype(np.int64),
            np.asarray(adj.data, dtype=np.float64))


def louvain(g: Graph, rng=None) -> Partition:
    """Two-phase Louvain modularity optimization (resolution 1).

    Local moving and aggregation alternate until a level brings no merge.
    A last local-moving sweep on the original graph makes the result a
    local optimum under single-node moves.
    """
    if g.n_edges == 0:
        raise ValueError("louvain needs at least one edge")
    rng = np.random.default_rng(rng)
    two_m = float(g.weights.sum() * 2.0)
    adj = g.adjacency
    deg = g.degrees.astype(np.float64)
    node2comm = np.arange(g.n_nodes, dtype=np.int64)
    while True:
        indptr, indices, weights = _csr(adj)
        n = len(deg)
        comm = np.arange(n, dtype=np.int64)
        moves = _local_moving(indptr, indices, weights, deg, comm, two_m, rng)
        _, comm = np.unique(comm, return_inverse=True)
        comm = comm.ravel().astype(np.int64)
        n_comm = int(comm.max()) + 1
        if moves == 0 or n_comm == n:
            break
        node2comm = comm[node2comm]
        agg = sp.coo_array(adj)
        adj = sp.csr_array((agg.data, (comm[agg.row], comm[agg.col])), shape=(n_comm, n_comm))
        deg = np.bincount(comm, weights=deg, minlength=n_comm)

    # refinement on the original graph
    indptr, indices, weights = _csr(g.adjacency)
    _, comm = np.unique(node2comm, return_inverse=True)
    comm = comm.ravel().astype(np.int64)
    _local_moving(indptr, indices, weights, g.degrees.astype(np.float64), comm, two_m, rng)
    return Partition(comm)
