"""NetMF: closed-form DeepWalk matrix and its low-rank factorization."""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .embedding import Embedding, EmbeddingParams
from .graph import Graph, volume

log = logging.getLogger(__name__)

DENSE_LIMIT = 20_000
# above this size the top-d eigenpairs come from ARPACK instead of LAPACK
EIGSH_THRESHOLD = 3_000


class DenseLimitError(MemoryError):
    """The dense |N| x |N| target would exceed the configured size limit."""


def transition_matrix(g: Graph) -> sp.csr_array:
    """Row-normalized adjacency ``D^-1 A``; rows of isolated nodes are zero."""
    dinv = _inv_degrees(g)
    return sp.csr_array(sp.diags_array(dinv) @ g.adjacency)


def _inv_degrees(g: Graph) -> np.ndarray:
    deg = g.degrees
    dinv = np.zeros_like(deg)
    np.divide(1.0, deg, out=dinv, where=deg > 0)
    return dinv


def netmf_target(g: Graph, window: int, negative: int, *, truncate: bool = True,
                 dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense NetMF matrix for DeepWalk with context ``window`` and ``negative`` samples.

    ``truncate=True`` returns ``log(max(1, X))`` with
    ``X = vol/(b*T) * sum_{r=1..T} (D^-1 A)^r D^-1``. With ``truncate=False``
    the plain ``log X`` is kept for positive entries (it can be negative) and
    zero entries map to 0.
    """
    n = g.n_nodes
    if window < 1 or negative < 1:
        raise ValueError("window and negative must be >= 1")
    if n > dense_limit:
        raise DenseLimitError(
            f"{n} nodes exceeds the dense limit of {dense_limit}; use a smaller graph or the ppr backend")
    P = transition_matrix(g)
    power = P.toarray()
    acc = power.copy()
    for _ in range(window - 1):
        power = P @ power
        acc += power
    dinv = _inv_degrees(g)
    vol = volume(g) if g.n_edges else 0.0
    acc *= vol / (negative * window)
    acc *= dinv[None, :]
    if truncate:
        np.maximum(acc, 1.0, out=acc)
        M = np.log(acc)
    else:
        M = np.zeros_like(acc)
        np.log(acc, out=M, where=acc > 0)
    # symmetric in exact arithmetic; average to make it bitwise symmetric
    return (M + M.T) * 0.5


def factorize(M: np.ndarray, dim: int, seed: int = 0) -> np.ndarray:
    """Rank-``dim`` factor ``U sqrt(max(lambda, 0))`` of a symmetric matrix.

    Eigenvalues are taken largest-first; negative ones contribute zero
    columns. Each eigenvector's sign is fixed so its largest-magnitude entry
    is positive, which makes the output reproducible.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("M must be square")
    if not 1 <= dim <= n:
        raise ValueError(f"dim={dim} outside [1, {n}]")
    if n > EIGSH_THRESHOLD and dim < n // 2:
        v0 = np.random.default_rng(seed).uniform(0.5, 1.0, size=n)
        vals, vecs = scipy.sparse.linalg.eigsh(M, k=dim, which="LA", v0=v0)
    else:
        vals, vecs = scipy.linalg.eigh(M, subset_by_index=[n - dim, n - 1], driver="evr")
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    return vecs * np.sqrt(np.maximum(vals, 0.0))


def netmf_embed(g: Graph, params: EmbeddingParams, *, truncate: bool = True,
                dense_limit: int = DENSE_LIMIT) -> Embedding:
    if params.backend != "netmf":
        raise ValueError("params.backend must be 'netmf'")
    if params.dim > g.n_nodes:
        raise ValueError(f"dimension {params.dim} exceeds node count {g.n_nodes}")
    M = netmf_target(g, params.window, params.negative, truncate=truncate, dense_limit=dense_limit)
    X = factorize(M, params.dim, params.seed)
    zero = np.flatnonzero(g.isolated()).tolist()
    if zero:
        log.info("netmf: %d isolated node(s) get zero rows", len(zero))
    return Embedding(X, params, zero_rows=zero)
