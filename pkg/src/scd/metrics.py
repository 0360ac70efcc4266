"""Partition quality: NMI, ARI and modularity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, Partition


@dataclass(frozen=True)
class EvalScores:
    nmi: float | None
    ari: float | None
    modularity: float

    def records(self) -> list[tuple[str, float]]:
        out = []
        if self.nmi is not None:
            out.append(("nmi", self.nmi))
        if self.ari is not None:
            out.append(("ari", self.ari))
        out.append(("modularity", self.modularity))
        return out


def _labels(p) -> np.ndarray:
    if isinstance(p, Partition):
        return p.labels
    return np.unique(np.asarray(p).ravel(), return_inverse=True)[1].ravel()


def contingency(truth, pred) -> np.ndarray:
    y, c = _labels(truth), _labels(pred)
    if len(y) != len(c):
        raise ValueError(f"partitions cover {len(y)} and {len(c)} nodes")
    table = sp.coo_array((np.ones(len(y)), (y, c)),
                         shape=(y.max() + 1 if len(y) else 0, c.max() + 1 if len(c) else 0))
    return table.toarray()


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return -math.fsum(p * np.log(p))


def nmi(truth, pred) -> float:
    """``2 I(Y;C) / (H(Y) + H(C))``; 1.0 if both are single-cluster, 0.0 if only one is."""
    table = contingency(truth, pred)
    n = int(table.sum())
    if n == 0:
        raise ValueError("empty partitions")
    hy = _entropy(table.sum(axis=1), n)
    hc = _entropy(table.sum(axis=0), n)
    if hy == 0.0 and hc == 0.0:
        return 1.0
    if hy == 0.0 or hc == 0.0:
        return 0.0
    rows, cols = np.nonzero(table)
    nij = table[rows, cols]
    ny, nc = table.sum(axis=1)[rows], table.sum(axis=0)[cols]
    # fsum is exactly rounded, hence independent of term order: nmi(Y, C) == nmi(C, Y)
    mi = math.fsum((nij / n) * np.log((nij * n) / (ny * nc)))
    return float(min(1.0, max(0.0, 2.0 * mi / (hy + hc))))


def _pairs(counts) -> int:
    return sum(int(c) * (int(c) - 1) // 2 for c in np.asarray(counts).ravel() if c > 1)


def ari(truth, pred) -> float:
    """Adjusted Rand index from the pair-counting contingency table.

    Pair counts are exact Python integers and the ratio is formed once,
    so simple cases come out exact (e.g. -0.5 rather than -0.49999999999999994).
    """
    table = contingency(truth, pred).astype(np.int64)
    n = int(table.sum())
    if n < 2:
        raise ValueError("ARI needs at least 2 nodes")
    index = _pairs(table)
    a = _pairs(table.sum(axis=1))
    b = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    # (index - a*b/total) / ((a+b)/2 - a*b/total), scaled by 2*total
    num = 2 * (index * total - a * b)
    den = (a + b) * total - 2 * a * b
    if den == 0:
        # both partitions trivial in the same way (all singletons or one block)
        return 1.0
    return num / den


def modularity(g: Graph, p) -> float:
    """Weighted modularity, evaluated per community as ``sum_c in_c/2m - (deg_c/2m)^2``."""
    labels = _labels(p)
    if len(labels) != g.n_nodes:
        raise ValueError("partition does not cover the graph")
    if g.n_edges == 0:
        raise ValueError("modularity is undefined for an edgeless graph")
    two_m = 2.0 * math.fsum(g.weights)
    k = labels.max() + 1
    u, v = g.edges[:, 0], g.edges[:, 1]
    same = labels[u] == labels[v]
    internal = np.bincount(labels[u[same]], weights=g.weights[same], minlength=k) * 2.0
    deg = np.bincount(labels, weights=g.degrees, minlength=k)
    return float((internal / two_m - (deg / two_m) ** 2).sum())


def evaluate(g: Graph, pred, truth=None) -> EvalScores:
    if truth is None:
        return EvalScores(None, None, modularity(g, pred))
    return EvalScores(nmi(truth, pred), ari(truth, pred), modularity(g, pred))
