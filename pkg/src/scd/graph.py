"""Weighted undirected graphs, partitions and their text formats."""

from __future__ import annotations

import io
import logging
import math
import os
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Malformed edge-list or partition input."""


class Graph:
    """Immutable weighted undirected simple graph.

    Nodes are dense integers ``0..n_nodes-1``. ``tokens[i]`` is the original
    name of node ``i`` as it appeared in the input file.

    Attributes
    ----------
    n_nodes : int
    edges : ndarray, shape (m, 2)
        Each undirected edge once, ``u < v``, sorted lexicographically.
    weights : ndarray, shape (m,)
    adjacency : scipy.sparse.csr_array
        Symmetric adjacency with sorted column indices per row.
    degrees : ndarray
        Generalized (weighted) degree per node.
    dropped_self_loops : int
    """

    def __init__(self, n_nodes, u, v, w=None, tokens=None):
        n_nodes = int(n_nodes)
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if w is None:
            w = np.ones(len(u))
        w = np.asarray(w, dtype=np.float64).ravel()
        if not (len(u) == len(v) == len(w)):
            raise ValueError("edge arrays differ in length")
        if n_nodes < 0:
            raise ValueError("n_nodes must be non-negative")
        if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n_nodes):
            raise ValueError("edge endpoint outside [0, n_nodes)")
        if len(w) and not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("edge weights must be finite and strictly positive")

        loops = u == v
        self.dropped_self_loops = int(loops.sum())
        if self.dropped_self_loops:
            log.warning("dropped %d self-loop(s)", self.dropped_self_loops)
        u, v, w = u[~loops], v[~loops], w[~loops]
        lo, hi = np.minimum(u, v), np.maximum(u, v)

        # merge duplicates by summing, in input order per key
        key = lo * max(n_nodes, 1) + hi
        uniq, inv = np.unique(key, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inv, w)
        self.edges = np.stack([uniq // max(n_nodes, 1), uniq % max(n_nodes, 1)], axis=1)
        self.weights = merged
        self.n_nodes = n_nodes

        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        vals = np.concatenate([merged, merged])
        adj = sp.csr_array((vals, (rows, cols)), shape=(n_nodes, n_nodes))
        adj.sort_indices()
        self.adjacency = adj
        self.degrees = np.asarray(adj.sum(axis=1)).ravel().astype(np.float64)

        if tokens is None:
            tokens = [str(i) for i in range(n_nodes)]
        tokens = list(tokens)
        if len(tokens) != n_nodes:
            raise ValueError("need one token per node")
        self.tokens = tokens
        self.index = {t: i for i, t in enumerate(tokens)}
        for arr in (self.edges, self.weights, self.degrees, adj.data, adj.indices, adj.indptr):
            arr.flags.writeable = False

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    @property
    def indptr(self) -> np.ndarray:
        return self.adjacency.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.adjacency.indices

    @property
    def data(self) -> np.ndarray:
        return self.adjacency.data

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def isolated(self) -> np.ndarray:
        """Boolean mask of degree-0 nodes."""
        return np.diff(self.indptr) == 0

    def components(self) -> tuple[int, np.ndarray]:
        return connected_components(self.adjacency, directed=False)

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph; node ``nodes[j]`` becomes node ``j``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        sub = self.adjacency[nodes][:, nodes].tocoo()
        keep = sub.row < sub.col
        return Graph(len(nodes), sub.row[keep], sub.col[keep], sub.data[keep],
                     tokens=[self.tokens[i] for i in nodes])

    def check(self) -> None:
        """Full-scan invariant check; raises AssertionError."""
        a = self.adjacency
        assert a.shape == (self.n_nodes, self.n_nodes)
        assert np.all(a.data > 0)
        assert a.diagonal().sum() == 0
        diff = a - a.T
        assert diff.nnz == 0 or np.all(diff.data == 0)
        for i in range(self.n_nodes):
            row = self.neighbors(i)
            assert np.all(row[1:] > row[:-1])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n_nodes == other.n_nodes and self.tokens == other.tokens
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def volume(g: Graph) -> float:
    """Sum of all adjacency entries, i.e. twice the total edge weight."""
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    return 2.0 * math.fsum(g.weights)


class Partition:
    """Non-overlapping node partition with canonical labels.

    Labels are renumbered to ``0..n_communities-1`` in order of first
    appearance, so ``[5, 5, 9]`` becomes ``[0, 0, 1]``.
    """

    def __init__(self, labels):
        labels = np.asarray(labels).ravel()
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        self.labels = rank[inv.ravel()] if len(labels) else np.zeros(0, dtype=np.int64)
        self.labels.flags.writeable = False
        self.n_communities = len(first)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    __hash__ = None

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_communities)

    def __repr__(self):
        return f"Partition(n_nodes={len(self)}, n_communities={self.n_communities})"


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8"), True
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data), True
    raise TypeError(f"cannot read from {type(source).__name__}")


def _data_lines(stream: Iterable[str]):
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def load_edge_list(source, weighted: bool | None = None) -> Graph:
    """Read ``u v [w]`` lines into a :class:`Graph`.

    ``weighted=None`` uses a third column when present, ``False`` ignores it
    and ``True`` requires it. Tokens are mapped to ids in first-seen order.
    """
    stream, close = _open_text(source)
    index: dict[str, int] = {}
    us, vs, ws = [], [], []
    try:
        for lineno, fields in _data_lines(stream):
            if len(fields) not in (2, 3):
                raise GraphFormatError(f"line {lineno}: expected 2 or 3 fields, got {len(fields)}")
            if weighted and len(fields) != 3:
                raise GraphFormatError(f"line {lineno}: missing weight")
            w = 1.0
            if len(fields) == 3 and weighted is not False:
                try:
                    w = float(fields[2])
                except ValueError:
                    raise GraphFormatError(f"line {lineno}: bad weight {fields[2]!r}") from None
                if not (w > 0 and math.isfinite(w)):
                    raise GraphFormatError(f"line {lineno}: weight must be positive, got {fields[2]}")
            for tok in fields[:2]:
                if tok not in index:
                    index[tok] = len(index)
            us.append(index[fields[0]])
            vs.append(index[fields[1]])
            ws.append(w)
    finally:
        if close:
            stream.close()
    if not index:
        raise GraphFormatError("empty edge list")
    return Graph(len(index), us, vs, ws, tokens=list(index))


def write_edge_list(g: Graph, sink) -> None:
    """Write ``u<TAB>v<TAB>w`` lines using node tokens.

    Edges go out ordered by (larger id, descending smaller id). Reading such a
    file back assigns ids in the same first-seen order, so a loaded graph
    survives write + load unchanged.
    """
    u, v = g.edges[:, 0], g.edges[:, 1]
    order = np.lexsort((-u, v))
    lines = [f"{g.tokens[a]}\t{g.tokens[b]}\t{float(w)!r}\n"
             for a, b, w in zip(u[order].tolist(), v[order].tolist(), g.weights[order].tolist())]
    _write_text(sink, "".join(lines))


def _write_text(sink, text: str) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def write_partition(p: Partition, tokens: Sequence[str], sink) -> None:
    """Write ``token<TAB>label`` per node, in node-id order."""
    if len(tokens) != len(p):
        raise ValueError("token list and partition differ in length")
    _write_text(sink, "".join(f"{t}\t{c}\n" for t, c in zip(tokens, p.labels.tolist())))


def load_partition(source, index: dict[str, int] | Sequence[str]) -> Partition:
    """Read a partition file against a token -> node-id map.

    Every node must be labelled exactly once.
    """
    if not isinstance(index, dict):
        index = {t: i for i, t in enumerate(index)}
    tokens = {i: t for t, i in index.items()}
    labels: dict[int, str] = {}
    stream, close = _open_text(source)
    try:
        for lineno, fields in _data_lines(stream):
            if len(fields) != 2:
                raise GraphFormatError(f"line {lineno}: expected 'node label'")
            tok, lab = fields
            if tok not in index:
                raise GraphFormatError(f"line {lineno}: unknown node {tok!r}")
            node = index[tok]
            if node in labels:
                raise GraphFormatError(f"line {lineno}: node {tok!r} labelled twice")
            labels[node] = lab
    finally:
        if close:
            stream.close()
    missing = [tokens[i] for i in range(len(index)) if i not in labels]
    if missing:
        shown = ", ".join(repr(t) for t in missing[:5])
        raise GraphFormatError(f"{len(missing)} node(s) without a label: {shown}")
    return Partition(np.array([labels[i] for i in range(len(index))]))
