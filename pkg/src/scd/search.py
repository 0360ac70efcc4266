"""Silhouette community detection: the search over embeddings and cluster counts."""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .embedding import Embedding, EmbeddingParams, PprParams
from .graph import Graph, Partition
from .kmeans import ClusteringError, minibatch_kmeans
from .netmf import netmf_embed
from .ppr import ppr_embed
from .silhouette import SilhouetteError, normalize_scores, silhouette_global

log = logging.getLogger(__name__)


class SearchError(RuntimeError):
    pass


def gamma_estimate(K: int) -> int:
    """Coarse-grid step ``round(K^(2/3))``, at least 1."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return max(1, int(round(K ** (2.0 / 3.0))))


def valid_range(K: int, gamma: int, k_min: int) -> list[int]:
    """``k_min, k_min + gamma, ...`` up to and including ``K``."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    ks = list(range(k_min, K + 1, gamma))
    if not ks:
        raise ValueError(f"empty k range: k_min={k_min} > K={K}")
    return ks


def effective_k_min(k_min: int, K: int) -> int:
    """Lower ``k_min`` on small graphs so that candidate communities keep ~k_min nodes."""
    return max(2, min(k_min, math.isqrt(K)))


def cluster_seed(seed: int, param_index: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, param_index, k]).generate_state(1)[0])


@dataclass
class SearchConfig:
    param_sets: list = field(default_factory=lambda: [EmbeddingParams()])
    K: int | None = None
    gamma: int = 0
    w: int = 5
    k_min: int = 5
    normalize: bool = False
    seed: int = 0
    fine_radius: int | None = None
    batch_size: int | None = None
    max_iters: int = 100
    ppr: PprParams = field(default_factory=PprParams)
    silhouette_sample: int | None = None
    truncate: bool = True

    def validate(self) -> None:
        if not self.param_sets:
            raise ValueError("param_sets is empty")
        if self.w < 1:
            raise ValueError("w must be >= 1")
        if self.k_min < 2:
            raise ValueError("k_min must be >= 2")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0 (0 = automatic)")
        if self.K is not None and self.K < self.k_min:
            raise ValueError("K must be >= k_min")


@dataclass
class Evaluation:
    param_index: int
    k: int
    silhouette: float | None
    phase: str
    millis: float
    error: str | None = None
    normalized: float | None = None


@dataclass
class SearchReport:
    evaluations: list = field(default_factory=list)
    params: list = field(default_factory=list)
    chosen_param: int | None = None
    chosen_k: int | None = None
    quality: float = -math.inf
    K: int = 0
    gamma: int = 0
    k_min: int = 0
    isolated: list = field(default_factory=list)
    embed_errors: dict = field(default_factory=dict)
    stage_seconds: dict = field(default_factory=dict)

    def trace(self, param_index: int) -> list[tuple[int, float]]:
        return [(e.k, e.silhouette) for e in self.evaluations
                if e.param_index == param_index and e.silhouette is not None]

    def fill_normalized(self) -> None:
        """Min-max normalize silhouettes within each embedding-dimension group."""
        groups: dict = {}
        for e in self.evaluations:
            if e.silhouette is not None:
                groups.setdefault(self._dim(e.param_index), []).append(e)
        for evs in groups.values():
            norm, _ = normalize_scores([(i, e.silhouette) for i, e in enumerate(evs)])
            for (_, v), e in zip(norm, evs):
                e.normalized = v

    def _dim(self, idx):
        p = self.params[idx]
        return ("ppr",) if p.backend == "ppr" else ("netmf", p.dim)


class _Evaluator:
    """Clusters one embedding at a given k and scores it, caching by k."""

    def __init__(self, X, param_index, config: SearchConfig, report: SearchReport | None):
        self.X = X
        self.param_index = param_index
        self.config = config
        self.report = report
        self.cache: dict = {}

    def __call__(self, k: int, phase: str):
        if k in self.cache:
            return self.cache[k]
        cfg = self.config
        t0 = time.perf_counter()
        try:
            model = minibatch_kmeans(self.X, k, batch_size=cfg.batch_size, max_iters=cfg.max_iters,
                                     rng=cluster_seed(cfg.seed, self.param_index, k))
            q = silhouette_global(self.X, model.labels, sample_size=cfg.silhouette_sample,
                                  rng=cluster_seed(cfg.seed, self.param_index, k))
            result = (model.labels, q, None)
        except (ClusteringError, SilhouetteError) as exc:
            result = (None, None, str(exc))
        ms = (time.perf_counter() - t0) * 1000.0
        if self.report is not None:
            self.report.evaluations.append(Evaluation(self.param_index, k, result[1], phase, ms, result[2]))
        self.cache[k] = result
        return result


def _matrix(emb) -> np.ndarray:
    return emb.matrix if isinstance(emb, Embedding) else np.asarray(emb, dtype=np.float64)


def coarse_sweep(emb, krange, w: int, *, config: SearchConfig | None = None, param_index: int = 0,
                 baseline: float = -math.inf, report: SearchReport | None = None, _evaluator=None):
    """Walk ``krange`` in order with patience ``w``.

    The patience counter starts at ``w``, drops by one per evaluation and
    resets to ``w`` whenever the silhouette beats the best value so far
    (initially ``baseline``). Returns ``(best_k, labels, quality, trace, improved)``;
    ``best_k`` is None when nothing beat ``baseline``.
    """
    if not krange:
        raise ValueError("empty k range")
    config = config or SearchConfig()
    ev = _evaluator or _Evaluator(_matrix(emb), param_index, config, report)
    best_k, best_labels, best_q = None, None, baseline
    trace = []
    counter = w
    for k in krange:
        if counter == 0:
            break
        labels, q, err = ev(k, "coarse")
        trace.append((k, q))
        counter -= 1
        if q is not None and q > best_q:
            best_k, best_labels, best_q = k, labels, q
            counter = w
    return best_k, best_labels, best_q, trace, best_k is not None


def fine_grained(best_k: int, emb, gamma: int, *, K: int | None = None, radius: int | None = None,
                 config: SearchConfig | None = None, param_index: int = 0,
                 report: SearchReport | None = None, _evaluator=None):
    """Evaluate every k within ``radius`` (default ``gamma - 1``) of ``best_k``, clipped to [2, K].

    Returns ``(k, labels, quality, trace)`` for the best k, lowest k on ties.
    """
    config = config or SearchConfig()
    X = _matrix(emb)
    ev = _evaluator or _Evaluator(X, param_index, config, report)
    K = X.shape[0] if K is None else K
    r = gamma - 1 if radius is None else radius
    lo, hi = max(2, best_k - r), min(K, best_k + r)
    trace = []
    for k in range(lo, hi + 1):
        labels, q, _ = ev(k, "fine")
        trace.append((k, q))
    if best_k not in dict(trace):
        labels, q, _ = ev(best_k, "fine")
        trace.append((best_k, q))
    scored = sorted((t for t in trace if t[1] is not None), key=lambda t: (-t[1], t[0]))
    if not scored:
        raise SearchError(f"no k near {best_k} could be evaluated")
    k, q = scored[0]
    return k, ev.cache[k][0], q, sorted(trace)


def embed(g: Graph, params: EmbeddingParams, ppr: PprParams = PprParams(), truncate: bool = True) -> Embedding:
    if params.backend == "netmf":
        return netmf_embed(g, params, truncate=truncate)
    return ppr_embed(g, ppr, embedding_params=params)


def scd_detect(g: Graph, config: SearchConfig) -> tuple[Partition, SearchReport]:
    """Run the full search and return the best partition with its report.

    Degree-0 nodes are left out of the embedding and each gets its own
    community in the returned partition.
    """
    config.validate()
    if g.n_nodes < 2 or g.n_edges < 1:
        raise SearchError("need at least 2 nodes and 1 edge")
    isolated = g.isolated()
    active = np.flatnonzero(~isolated)
    sub = g.subgraph(active) if isolated.any() else g
    n = sub.n_nodes
    K = min(config.K or n, n)
    k_min = effective_k_min(config.k_min, K)
    gamma = config.gamma or gamma_estimate(K)
    krange = valid_range(K, gamma, k_min)
    report = SearchReport(params=list(config.param_sets), K=K, gamma=gamma, k_min=k_min,
                          isolated=np.flatnonzero(isolated).tolist())
    stage = report.stage_seconds

    best_labels = None
    for p_idx, params in enumerate(config.param_sets):
        t0 = time.perf_counter()
        if params.backend == "netmf" and params.dim > n:
            log.info("clamping dimension %d to node count %d", params.dim, n)
            params = dataclasses.replace(params, dim=n)
            report.params[p_idx] = params
        try:
            emb = embed(sub, params, config.ppr, config.truncate)
        except (ValueError, MemoryError) as exc:
            log.warning("embedding %s failed: %s", params.label(), exc)
            report.embed_errors[p_idx] = str(exc)
            continue
        t1 = time.perf_counter()
        stage[f"embed[{p_idx}]"] = t1 - t0
        ev = _Evaluator(emb.matrix, p_idx, config, report)
        best_k, labels, q, _, improved = coarse_sweep(
            emb, krange, config.w, config=config, param_index=p_idx,
            baseline=report.quality, _evaluator=ev)
        t2 = time.perf_counter()
        stage[f"coarse[{p_idx}]"] = t2 - t1
        if improved:
            k, labels, q, _ = fine_grained(best_k, emb, gamma, K=K, radius=config.fine_radius,
                                           config=config, param_index=p_idx, _evaluator=ev)
            stage[f"fine[{p_idx}]"] = time.perf_counter() - t2
            report.quality = q
            report.chosen_k = k
            report.chosen_param = p_idx
            best_labels = labels
    if best_labels is None:
        raise SearchError("no parameter set produced a partition")
    if config.normalize:
        report.fill_normalized()

    full = np.empty(g.n_nodes, dtype=np.int64)
    full[active] = best_labels
    full[isolated] = best_labels.max() + 1 + np.arange(isolated.sum())
    return Partition(full), report


def sweep(emb, krange, *, config: SearchConfig | None = None, param_index: int = 0) -> list[tuple[int, float | None]]:
    """Silhouette at every k in ``krange`` (no early stopping)."""
    config = config or SearchConfig()
    ev = _Evaluator(_matrix(emb), param_index, config, None)
    return [(k, ev(k, "sweep")[1]) for k in krange]
