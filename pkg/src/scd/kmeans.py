"""Mini-batch k-means with k-means++ seeding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterModel:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    k: int
    seed: int | None = None
    n_iter: int = 0

    @property
    def n_clusters_found(self) -> int:
        return int(len(np.unique(self.labels)))


def _as_rows(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ClusteringError("need a non-empty 2-D array of rows")
    return X


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def n_distinct_rows(X) -> int:
    return len(np.unique(_as_rows(X), axis=0))


def assign(X, centers) -> np.ndarray:
    """Index of the nearest center per row; ties go to the lowest index."""
    X = _as_rows(X)
    C = np.ascontiguousarray(centers, dtype=np.float64)
    if C.ndim == 1:
        C = C[:, None]
    if C.shape[0] == 0:
        raise ClusteringError("no centers")
    if C.shape[1] != X.shape[1]:
        raise ClusteringError(f"dimension mismatch: rows have {X.shape[1]}, centers {C.shape[1]}")
    return kernels.assign(X, C)[0]


def kmeanspp_init(X, k: int, rng=None) -> np.ndarray:
    """Pick ``k`` distinct rows of ``X`` by D^2 sampling."""
    X = _as_rows(X)
    rng = _rng(rng)
    n = X.shape[0]
    if k < 1:
        raise ClusteringError("k must be >= 1")
    if k > n or k > n_distinct_rows(X):
        raise ClusteringError(f"k={k} exceeds the number of distinct rows")
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        cum = np.cumsum(d2)
        total = cum[-1]
        if total <= 0:
            raise ClusteringError(f"k={k} exceeds the number of distinct rows")
        idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
        idx = min(idx, n - 1)
        while d2[idx] == 0:  # guard against landing on a zero-weight row at a float boundary
            idx = (idx - 1) % n
        chosen.append(idx)
        np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1), out=d2)
    return X[chosen].copy()


def _reseed_empty(X, centers, counts, labels, d2):
    """Move centers that own no row onto the rows farthest from their center."""
    owned = np.bincount(labels, minlength=len(centers))
    empty = np.flatnonzero(owned == 0)
    if len(empty) == 0:
        return False
    far = np.argsort(-d2, kind="stable")
    for c, row in zip(empty, far):
        centers[c] = X[row]
        counts[c] = 0.0
    return True


def minibatch_kmeans(X, k: int, batch_size: int | None = None, max_iters: int = 100,
                     rng=None, tol: float = 1e-4, n_init: int = 1,
                     refine: bool = False) -> ClusterModel:
    """Mini-batch k-means (per-center running means, learning rate 1/count).

    Each step draws ``batch_size`` rows without replacement, assigns them to
    the current centers, then moves every center to the running mean of all
    rows it has received. Centers left without rows are re-seeded after each
    epoch. Stops after ``max_iters`` steps or once the mean squared center
    shift falls below ``tol`` times the mean per-feature variance. A final
    full assignment produces labels and inertia.

    With ``n_init > 1`` the whole procedure is repeated with fresh draws from
    the same generator and the lowest-inertia run is kept (earliest on ties).
    ``refine=True`` finishes each run with single-point (Hartigan) moves,
    which escape many of the fixed points plain center updates stall in.
    """
    X = _as_rows(X)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = _rng(rng)
    if n_init < 1:
        raise ClusteringError("n_init must be >= 1")
    best = None
    for _ in range(n_init):
        model = _minibatch_run(X, k, batch_size, max_iters, rng, tol, seed)
        if refine:
            model = _hartigan(X, model)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


MAX_REFINE_PASSES = 100


def _hartigan(X, model: ClusterModel) -> ClusterModel:
    k = model.k
    labels = model.labels.astype(np.int64).copy()
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    centers = np.zeros((k, X.shape[1]))
    np.add.at(centers, labels, X)
    hit = counts > 0
    centers[hit] /= counts[hit, None]
    centers[~hit] = model.centers[~hit]
    for _ in range(MAX_REFINE_PASSES):
        if kernels.hartigan_pass(X, labels, centers, counts) == 0:
            break
    # exact means, then the usual nearest-center labels
    for c in np.flatnonzero(counts > 0):
        centers[c] = X[labels == c].mean(axis=0)
    labels, d2 = kernels.assign(X, centers)
    return ClusterModel(centers=centers, labels=labels, inertia=float(d2.sum()), k=k,
                        seed=model.seed, n_iter=model.n_iter)


def _minibatch_run(X, k, batch_size, max_iters, rng, tol, seed) -> ClusterModel:
    n, d = X.shape
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} outside [1, {n}]")
    if batch_size is None:
        batch_size = min(1024, n)
    if batch_size < 1:
        raise ClusteringError("batch_size must be >= 1")
    batch_size = min(batch_size, n)

    centers = kmeanspp_init(X, k, rng)
    counts = np.zeros(k)
    steps_per_epoch = -(-n // batch_size)
    shift_tol = tol * float(X.var(axis=0).mean())
    epoch_hits = np.zeros(k)
    it = 0
    for it in range(1, max_iters + 1):
        batch = rng.choice(n, size=batch_size, replace=False) if batch_size < n else rng.permutation(n)
        Xb = X[batch]
        lab, _ = kernels.assign(Xb, centers)
        sums = np.zeros((k, d))
        np.add.at(sums, lab, Xb)
        m = np.bincount(lab, minlength=k).astype(np.float64)
        hit = m > 0
        new = centers.copy()
        new[hit] = (counts[hit, None] * centers[hit] + sums[hit]) / (counts[hit] + m[hit])[:, None]
        counts += m
        epoch_hits += m
        shift = float(((new - centers) ** 2).sum()) / k
        centers = new
        if it % steps_per_epoch == 0:
            # a full pass only when some center received nothing this epoch
            starved = bool((epoch_hits == 0).any())
            epoch_hits[:] = 0.0
            if starved:
                labels, d2 = kernels.assign(X, centers)
                if _reseed_empty(X, centers, counts, labels, d2):
                    continue
        if shift <= shift_tol:
            break

    labels, d2 = kernels.assign(X, centers)
    # a row farthest from its center can take over an empty cluster; repeat a bounded number of times
    for _ in range(k):
        if not _reseed_empty(X, centers, counts, labels, d2):
            break
        labels, d2 = kernels.assign(X, centers)
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
        labels, d2 = kernels.assign(X, centers)
    return ClusterModel(centers=centers, labels=labels, inertia=float(d2.sum()), k=k,
                        seed=seed, n_iter=it)
