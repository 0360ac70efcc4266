"""Personalized PageRank node embedding."""

from __future__ import annotations

import logging

import numpy as np

from . import kernels
from .embedding import Embedding, EmbeddingParams, PprParams
from .graph import Graph

log = logging.getLogger(__name__)


def _csr_parts(g: Graph):
    deg = g.degrees
    dinv = np.zeros_like(deg)
    np.divide(1.0, deg, out=dinv, where=deg > 0)
    return (g.indptr.astype(np.int64), g.indices.astype(np.int64),
            np.asarray(g.data, dtype=np.float64), dinv)


def ppr_vector(g: Graph, u: int, params: PprParams = PprParams()) -> tuple[np.ndarray, bool]:
    """Stationary distribution of a walk restarting at ``u``.

    Iterates ``x <- alpha * P^T x + (1 - alpha) e_u`` from ``x = e_u`` until the
    L1 change drops below ``params.tol``. Mass sitting on a node without
    edges restarts at ``u``. Returns ``(vector, converged)``.
    """
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    if not 0 <= u < g.n_nodes:
        raise IndexError(f"node {u} out of range")
    indptr, indices, weights, dinv = _csr_parts(g)
    rows, _, last = kernels.ppr_rows(indptr, indices, weights, dinv, np.array([u], dtype=np.int64),
                                     params.alpha, params.tol, params.max_iter)
    return rows[0], bool(last[0] < params.tol)


def ppr_embed(g: Graph, params: PprParams = PprParams(),
              embedding_params: EmbeddingParams | None = None) -> Embedding:
    """One PPR vector per node, stacked row-wise into an |N| x |N| matrix.

    Each walk is confined to its source's connected component, so every
    component is solved on its own induced subgraph.
    """
    n = g.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    out = np.zeros((n, n))
    n_comp, comp = g.components()
    order = np.argsort(comp, kind="stable")
    bounds = np.searchsorted(comp[order], np.arange(n_comp + 1))
    unconverged = []
    for c in range(n_comp):
        nodes = order[bounds[c]:bounds[c + 1]]
        if len(nodes) == 1:
            out[nodes[0], nodes[0]] = 1.0
            continue
        sub = g.subgraph(nodes)
        indptr, indices, weights, dinv = _csr_parts(sub)
        sources = np.arange(len(nodes), dtype=np.int64)
        rows, _, last = kernels.ppr_rows(indptr, indices, weights, dinv, sources,
                                         params.alpha, params.tol, params.max_iter)
        out[np.ix_(nodes, nodes)] = rows
        unconverged.extend(nodes[last >= params.tol].tolist())
    if unconverged:
        log.warning("ppr: %d source(s) did not converge in %d iterations",
                    len(unconverged), params.max_iter)
    if embedding_params is None:
        embedding_params = EmbeddingParams(backend="ppr", dim=max(1, n))
    zero = np.flatnonzero(g.isolated()).tolist()
    return Embedding(out, embedding_params, zero_rows=zero, unconverged=sorted(unconverged))
