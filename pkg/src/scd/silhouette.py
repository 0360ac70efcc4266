"""Silhouette scores: per point, global mean, and min-max normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class SilhouetteError(ValueError):
    pass


@dataclass(frozen=True)
class SilhouetteResult:
    per_point: np.ndarray
    global_score: float
    k: int


def _prepare(X, labels):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(labels).ravel()
    if len(labels) != X.shape[0]:
        raise SilhouetteError("one label per row required")
    _, labels = np.unique(labels, return_inverse=True)
    labels = labels.ravel().astype(np.int64)
    counts = np.bincount(labels).astype(np.int64)
    if len(counts) < 2:
        raise SilhouetteError("silhouette needs at least 2 clusters")
    return X, labels, counts


def _scores(a, b, own_counts):
    top = np.maximum(a, b)
    s = np.zeros_like(a)
    np.divide(b - a, top, out=s, where=top > 0)
    s[own_counts == 1] = 0.0
    return np.clip(s, -1.0, 1.0)


def silhouette_samples(X, labels, sample_size: int | None = None, rng=None) -> SilhouetteResult:
    """Per-point Silhouette with Euclidean distance.

    ``s(i) = (b - a) / max(a, b)``; members of singleton clusters score 0,
    as does the degenerate ``a = b = 0`` case. With ``sample_size`` set, a
    uniform subsample of rows is scored instead (an approximation).
    """
    X, labels, _ = _prepare(X, labels)
    if sample_size is not None and sample_size < X.shape[0]:
        idx = np.sort(np.random.default_rng(rng).choice(X.shape[0], sample_size, replace=False))
        X, labels = X[idx], labels[idx]
    X, labels, counts = _prepare(X, labels)
    a, b = kernels.silhouette_ab(X, labels, counts)
    s = _scores(a, b, counts[labels])
    return SilhouetteResult(per_point=s, global_score=float(s.mean()), k=len(counts))


def silhouette_point(i: int, X, labels) -> float:
    """Silhouette of the single row ``i`` (O(N d))."""
    X, labels, counts = _prepare(X, labels)
    dist = np.sqrt(((X - X[i]) ** 2).sum(axis=1))
    sums = np.bincount(labels, weights=dist, minlength=len(counts))
    own = labels[i]
    if counts[own] == 1:
        return 0.0
    a = sums[own] / (counts[own] - 1)
    mean = sums / counts
    mean[own] = np.inf
    b = mean.min()
    top = max(a, b)
    return float((b - a) / top) if top > 0 else 0.0


def silhouette_global(X, labels, sample_size: int | None = None, rng=None) -> float:
    """Mean per-point Silhouette over all rows."""
    return silhouette_samples(X, labels, sample_size=sample_size, rng=rng).global_score


def normalize_scores(scores) -> tuple[list[tuple[int, float]], bool]:
    """Min-max rescale ``[(k, s), ...]`` to [0, 1].

    Returns ``(normalized, degenerate)``; when every score is equal the
    result is all zeros and ``degenerate`` is True.
    """
    scores = list(scores)
    if not scores:
        return [], True
    vals = np.array([s for _, s in scores], dtype=np.float64)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        return [(k, 0.0) for k, _ in scores], True
    # only true maxima may reach 1.0, so the argmax cannot move
    below_one = np.nextafter(1.0, 0.0)
    out = [(k, 1.0 if s == hi else float(min((s - lo) / (hi - lo), below_one)))
           for k, s in scores]
    return out, False
