"""Hot inner loops, each with a numba and a numpy implementation.

The public names at the bottom are bound to one of the two variants
depending on :data:`scd._accel.USE_NUMBA`. Both variants are importable
by their private names so tests and the benchmark can compare them.

Every kernel is deterministic: parallel loops only run over independent
rows, all reductions happen in a fixed sequential order.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit, prange

_CHUNK = 256


# ---------------------------------------------------------------- distances

@njit(parallel=True)
def _assign_numba(X, C):
    n, d = X.shape
    k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    for i in prange(n):
        bi = 0
        bd = np.inf
        for c in range(k):
            s = 0.0
            for t in range(d):
                diff = X[i, t] - C[c, t]
                s += diff * diff
            if s < bd:
                bd = s
                bi = c
        labels[i] = bi
        best[i] = bd
    return labels, best


def _assign_numpy(X, C):
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    step = max(1, (1 << 22) // max(1, C.shape[0] * X.shape[1]))
    for lo in range(0, n, step):
        diff = X[lo:lo + step, None, :] - C[None, :, :]
        # accumulate feature by feature, the same order as the jitted loop,
        # so both paths break distance ties identically
        d2 = diff[:, :, 0] * diff[:, :, 0]
        for t in range(1, diff.shape[2]):
            d2 += diff[:, :, t] * diff[:, :, t]
        lab = np.argmin(d2, axis=1)
        labels[lo:lo + step] = lab
        best[lo:lo + step] = d2[np.arange(len(lab)), lab]
    return labels, best


# --------------------------------------------------------------- silhouette

@njit(parallel=True)
def _silhouette_ab_numba(X, labels, counts):
    n, d = X.shape
    k = counts.shape[0]
    a = np.zeros(n)
    b = np.zeros(n)
    for i in prange(n):
        sums = np.zeros(k)
        for j in range(n):
            s = 0.0
            for t in range(d):
                diff = X[i, t] - X[j, t]
                s += diff * diff
            sums[labels[j]] += np.sqrt(s)
        own = labels[i]
        if counts[own] > 1:
            a[i] = sums[own] / (counts[own] - 1)
        bb = np.inf
        for c in range(k):
            if c != own and counts[c] > 0:
                v = sums[c] / counts[c]
                if v < bb:
                    bb = v
        b[i] = bb
    return a, b


def _silhouette_ab_numpy(X, labels, counts):
    n = X.shape[0]
    k = len(counts)
    order = np.argsort(labels, kind="stable")
    Xs = X[order]
    present = np.flatnonzero(counts)
    starts = np.concatenate([[0], np.cumsum(counts[present])[:-1]])
    a = np.zeros(n)
    b = np.zeros(n)
    for lo in range(0, n, _CHUNK):
        rows = X[lo:lo + _CHUNK]
        diff = rows[:, None, :] - Xs[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        sums = np.zeros((len(rows), k))
        sums[:, present] = np.add.reduceat(dist, starts, axis=1)
        own = labels[lo:lo + _CHUNK]
        idx = np.arange(len(rows))
        own_cnt = counts[own]
        with np.errstate(divide="ignore", invalid="ignore"):
            a[lo:lo + _CHUNK] = np.where(own_cnt > 1, sums[idx, own] / (own_cnt - 1), 0.0)
            mean = sums / np.where(counts > 0, counts, 1)
        mean[:, counts == 0] = np.inf
        mean[idx, own] = np.inf
        b[lo:lo + _CHUNK] = mean.min(axis=1)
    return a, b


# ---------------------------------------------------------------------- ppr

@njit(parallel=True)
def _ppr_rows_numba(indptr, indices, weights, dinv, sources, alpha, tol, max_iter):
    n = indptr.shape[0] - 1
    m = sources.shape[0]
    out = np.zeros((m, n))
    iters = np.zeros(m, dtype=np.int64)
    last = np.zeros(m)
    for r in prange(m):
        u = sources[r]
        cur = np.zeros(n)
        cur[u] = 1.0
        nxt = np.zeros(n)
        for it in range(max_iter):
            for i in range(n):
                nxt[i] = 0.0
            dangling = 0.0
            for j in range(n):
                if cur[j] == 0.0:
                    continue
                if indptr[j] == indptr[j + 1]:
                    dangling += cur[j]
                    continue
                val = alpha * cur[j] * dinv[j]
                for p in range(indptr[j], indptr[j + 1]):
                    nxt[indices[p]] += val * weights[p]
            nxt[u] += (1.0 - alpha) + alpha * dangling
            delta = 0.0
            for i in range(n):
                delta += abs(nxt[i] - cur[i])
            tmp = cur
            cur = nxt
            nxt = tmp
            iters[r] = it + 1
            last[r] = delta
            if delta < tol:
                break
        for i in range(n):
            out[r, i] = cur[i]
    return out, iters, last


def _ppr_rows_numpy(indptr, indices, weights, dinv, sources, alpha, tol, max_iter):
    import scipy.sparse as sp

    n = len(indptr) - 1
    m = len(sources)
    # column j of PT scatters node j's mass to its neighbours
    PT = sp.csr_array((weights, indices, indptr), shape=(n, n)).T.tocsr()
    PT = PT @ sp.diags_array(dinv)
    dangling = (np.diff(indptr) == 0).astype(np.float64)
    cur = np.zeros((n, m))
    cur[sources, np.arange(m)] = 1.0
    iters = np.zeros(m, dtype=np.int64)
    last = np.zeros(m)
    active = np.arange(m)
    restart = np.zeros((n, m))
    restart[sources, np.arange(m)] = 1.0
    for it in range(max_iter):
        sub = cur[:, active]
        nxt = alpha * (PT @ sub)
        nxt += restart[:, active] * ((1.0 - alpha) + alpha * (dangling @ sub))
        delta = np.abs(nxt - sub).sum(axis=0)
        cur[:, active] = nxt
        iters[active] = it + 1
        last[active] = delta
        active = active[delta >= tol]
        if len(active) == 0:
            break
    return np.ascontiguousarray(cur.T), iters, last


# ------------------------------------------------------- label propagation

def _lpa_pass_py(indptr, indices, weights, labels, order, draws, acc, touched):
    changed = 0
    for idx in range(order.shape[0]):
        i = order[idx]
        lo = indptr[i]
        hi = indptr[i + 1]
        if lo == hi:
            continue
        nt = 0
        for p in range(lo, hi):
            c = labels[indices[p]]
            if acc[c] < 0.0:
                acc[c] = 0.0
                touched[nt] = c
                nt += 1
            acc[c] += weights[p]
        top = 0.0
        for t in range(nt):
            if acc[touched[t]] > top:
                top = acc[touched[t]]
        thresh = top * (1.0 - 1e-12)
        nbest = 0
        keep = False
        for t in range(nt):
            c = touched[t]
            if acc[c] >= thresh:
                if c == labels[i]:
                    keep = True
                touched[nbest] = c
                nbest += 1
            acc[c] = -1.0
        if not keep:
            pick = int(draws[i] * nbest)
            if pick >= nbest:
                pick = nbest - 1
            labels[i] = touched[pick]
            changed += 1
    return changed


# ----------------------------------------------------------------- louvain

def _louvain_move_py(indptr, indices, weights, deg, comm, tot, size, order,
                     two_m, free, nfree, acc, touched):
    """One local-moving sweep. Returns the number of nodes that changed community.

    ``acc`` must hold -1.0 everywhere on entry and is restored on exit.
    ``free[:nfree[0]]`` is a stack of currently empty community ids.
    """
    moved = 0
    for idx in range(order.shape[0]):
        i = order[idx]
        ci = comm[i]
        ki = deg[i]
        nt = 0
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j == i:
                continue
            c = comm[j]
            if acc[c] < 0.0:
                acc[c] = 0.0
                touched[nt] = c
                nt += 1
            acc[c] += weights[p]
        tot[ci] -= ki
        size[ci] -= 1
        if size[ci] == 0:
            tot[ci] = 0.0
            free[nfree[0]] = ci
            nfree[0] += 1
        scale = ki / two_m
        w_own = acc[ci] if acc[ci] >= 0.0 else 0.0
        stay = w_own - tot[ci] * scale
        best = ci
        best_gain = stay
        eps = 1e-12 * (ki + 1.0)
        for t in range(nt):
            c = touched[t]
            if c != ci:
                gain = acc[c] - tot[c] * scale
                if gain > best_gain + eps:
                    best_gain = gain
                    best = c
        # an empty community has gain exactly 0
        if size[ci] > 0 and 0.0 > best_gain + eps:
            best = -1
        for t in range(nt):
            acc[touched[t]] = -1.0
        if best == -1:
            nfree[0] -= 1
            best = free[nfree[0]]
        elif best == ci and size[ci] == 0:
            # ci sits on top of the free stack, take it back
            nfree[0] -= 1
        comm[i] = best
        tot[best] += ki
        size[best] += 1
        if best != ci:
            moved += 1
    return moved


# ------------------------------------------------------ k-means refinement

def _hartigan_pass_py(X, labels, centers, counts):
    """One sweep of single-point moves that lower the k-means objective.

    Moving row i from cluster a to b changes the objective by
    ``n_b/(n_b+1) |x-c_b|^2 - n_a/(n_a-1) |x-c_a|^2``; the best strictly
    negative move is applied and both means are updated in place.
    """
    n, d = X.shape
    k = centers.shape[0]
    moved = 0
    for i in range(n):
        a = labels[i]
        if counts[a] <= 1:
            continue
        da = 0.0
        for j in range(d):
            t = X[i, j] - centers[a, j]
            da += t * t
        removal = counts[a] / (counts[a] - 1.0) * da
        best = a
        best_cost = removal * (1.0 - 1e-12)
        for c in range(k):
            if c == a:
                continue
            dc = 0.0
            for j in range(d):
                t = X[i, j] - centers[c, j]
                dc += t * t
            cost = counts[c] / (counts[c] + 1.0) * dc
            if cost < best_cost:
                best_cost = cost
                best = c
        if best != a:
            na = counts[a]
            nb = counts[best]
            for j in range(d):
                centers[a, j] = (na * centers[a, j] - X[i, j]) / (na - 1.0)
                centers[best, j] = (nb * centers[best, j] + X[i, j]) / (nb + 1.0)
            counts[a] = na - 1.0
            counts[best] = nb + 1.0
            labels[i] = best
            moved += 1
    return moved


_hartigan_pass_numba = njit(_hartigan_pass_py)
_lpa_pass_numba = njit(_lpa_pass_py)
_louvain_move_numba = njit(_louvain_move_py)


if USE_NUMBA:
    assign = _assign_numba
    silhouette_ab = _silhouette_ab_numba
    ppr_rows = _ppr_rows_numba
    lpa_pass = _lpa_pass_numba
    hartigan_pass = _hartigan_pass_numba
    louvain_move = _louvain_move_numba
else:
    assign = _assign_numpy
    silhouette_ab = _silhouette_ab_numpy
    ppr_rows = _ppr_rows_numpy
    lpa_pass = _lpa_pass_py
    hartigan_pass = _hartigan_pass_py
    louvain_move = _louvain_move_py
