"""Simplified LFR benchmark graphs with planted communities.

Degrees and community sizes follow truncated power laws. Each node sends
about ``(1 - mixing)`` of its stubs inside its community and the rest
outside, and both stub sets are matched configuration-model style with
rejection of self-loops, multi-edges and (for external stubs) same-community
pairs. The iterative rewiring of the original LFR procedure is not done.
"""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .graph import Graph, Partition, write_edge_list, write_partition

log = logging.getLogger(__name__)

MAX_RETRIES = 20
MATCH_BUDGET = 100  # attempted pairs per stub
SWAP_PATIENCE = 500


class InfeasibleError(ValueError):
    """The parameter combination cannot be realized."""


@dataclass(frozen=True)
class LfrParams:
    n: int
    avg_deg: float
    max_deg: int
    mixing: float
    degree_exp: float = 2.0
    comm_exp: float = 1.0
    min_comm: int | None = None
    max_comm: int | None = None
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.mixing <= 1.0:
            raise InfeasibleError(f"mixing {self.mixing} outside [0, 1]")
        if self.avg_deg < 1:
            raise InfeasibleError("avg_deg must be >= 1")
        if self.max_deg < self.avg_deg:
            raise InfeasibleError(f"max_deg {self.max_deg} < avg_deg {self.avg_deg}")
        if self.max_deg >= self.n:
            raise InfeasibleError(f"max_deg {self.max_deg} >= n {self.n}")


def _pl_mean(a: float, b: float, tau: float) -> float:
    if b <= a:
        return a
    if abs(tau - 1.0) < 1e-12:
        return (b - a) / np.log(b / a)
    if abs(tau - 2.0) < 1e-12:
        return np.log(b / a) / (1.0 / a - 1.0 / b)
    z = (b ** (1 - tau) - a ** (1 - tau)) / (1 - tau)
    return (b ** (2 - tau) - a ** (2 - tau)) / (2 - tau) / z


def _pl_sample(rng, a: float, b: float, tau: float, size: int) -> np.ndarray:
    u = rng.random(size)
    if b <= a:
        return np.full(size, a)
    if abs(tau - 1.0) < 1e-12:
        return a * (b / a) ** u
    lo, hi = a ** (1 - tau), b ** (1 - tau)
    return (lo + u * (hi - lo)) ** (1.0 / (1 - tau))


def _min_for_mean(mean: float, b: float, tau: float) -> float:
    """Lower cutoff of a power law on [a, b] whose mean equals ``mean``."""
    if mean >= b:
        return b
    lo, hi = 1e-9, b
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _pl_mean(mid, b, tau) < mean:
            lo = mid
        else:
            hi = mid
    return max(1.0, 0.5 * (lo + hi))


def _degrees(p: LfrParams, rng) -> np.ndarray:
    a = _min_for_mean(p.avg_deg, p.max_deg, p.degree_exp)
    deg = np.rint(_pl_sample(rng, a, p.max_deg, p.degree_exp, p.n)).astype(np.int64)
    deg = np.clip(deg, 1, p.max_deg)
    if deg.sum() % 2:
        below = np.flatnonzero(deg < p.max_deg)
        if len(below):
            deg[below[0]] += 1
        else:
            deg[0] -= 1
    return deg


def _community_sizes(p: LfrParams, k_in: np.ndarray, rng) -> np.ndarray:
    need = int(k_in.max()) + 1
    s_min = p.min_comm if p.min_comm is not None else max(3, int(np.rint(_min_for_mean(
        p.avg_deg, p.max_deg, p.degree_exp))))
    s_max = p.max_comm if p.max_comm is not None else max(p.max_deg, need)
    s_max = min(s_max, p.n)
    s_min = min(s_min, s_max)
    if s_max < need:
        raise InfeasibleError(f"largest community ({s_max}) cannot hold internal degree {need - 1}")
    sizes: list[int] = []
    total = 0
    while total < p.n:
        s = int(np.rint(_pl_sample(rng, s_min, s_max, p.comm_exp, 1)[0]))
        sizes.append(s)
        total += s
    sizes[-1] -= total - p.n
    if sizes[-1] < s_min and len(sizes) > 1:
        spare = sizes.pop()
        # hand leftover nodes to communities with room
        while spare:
            room = [i for i, s in enumerate(sizes) if s < s_max]
            if not room:
                sizes.append(spare)
                break
            sizes[room[int(rng.integers(len(room)))]] += 1
            spare -= 1
    return _fit_capacity(np.array(sizes, dtype=np.int64), k_in)


def _fit_capacity(sizes: np.ndarray, k_in: np.ndarray) -> np.ndarray:
    """Resize communities until every node can sit in one larger than its internal degree.

    For each threshold t the communities of size > t must offer at least as
    many slots as there are nodes with internal degree >= t. A violated
    threshold grows the largest community of size <= t to t + 1 and takes the
    nodes from the smallest other communities.
    """
    n = int(sizes.sum())
    thresholds = np.unique(k_in)[::-1]
    demand = np.array([(k_in >= t).sum() for t in thresholds])
    for _ in range(10 * len(sizes) + 10):
        bad = None
        for t, need in zip(thresholds, demand):
            if sizes[sizes > t].sum() < need:
                bad = int(t)
                break
        if bad is None:
            return sizes
        if bad + 1 > n:
            raise InfeasibleError(f"internal degree {bad} needs a community larger than the graph")
        small = np.flatnonzero(sizes <= bad)
        c = small[int(np.argmax(sizes[small]))]
        excess = bad + 1 - sizes[c]
        sizes[c] = bad + 1
        for j in np.argsort(sizes, kind="stable"):
            if excess == 0:
                break
            if j == c:
                continue
            take = min(excess, sizes[j])
            sizes[j] -= take
            excess -= take
        if excess:
            raise InfeasibleError("community sizes cannot absorb the degree sequence")
        keep = sizes > 0
        sizes = sizes[keep]
    raise InfeasibleError("could not fit community sizes to the internal degrees")


def _assign_nodes(k_in: np.ndarray, sizes: np.ndarray, rng) -> np.ndarray | None:
    room = sizes.copy()
    member = np.empty(len(k_in), dtype=np.int64)
    order = np.lexsort((rng.random(len(k_in)), -k_in))
    for i in order:
        ok = np.flatnonzero((sizes > k_in[i]) & (room > 0))
        if len(ok) == 0:
            return None
        w = np.cumsum(room[ok])
        c = ok[min(int(np.searchsorted(w, rng.random() * w[-1], side="right")), len(ok) - 1)]
        member[i] = c
        room[c] -= 1
    return member


def _match(stubs: np.ndarray, rng, edges: set, forbid_comm=None) -> list[tuple[int, int]]:
    """Pair stubs at random, rejecting loops, duplicates and (optionally) same-community pairs.

    Random re-pairing rounds run until they stall; leftover stubs are then
    placed by swapping with an already accepted edge. Stubs that still
    cannot be placed within the attempt budget are dropped.
    """
    def ok(a, b):
        if a == b:
            return False
        if forbid_comm is not None and forbid_comm[a] == forbid_comm[b]:
            return False
        return ((a, b) if a < b else (b, a)) not in edges

    out: list[tuple[int, int]] = []
    pool = stubs.copy()
    budget = MATCH_BUDGET * max(1, len(stubs))
    attempts = 0
    stalled = 0
    while len(pool) > 1 and attempts < budget and stalled < 5:
        rng.shuffle(pool)
        left = pool[len(pool) - len(pool) % 2:]
        pool = pool[:len(pool) - len(pool) % 2]
        attempts += len(pool) // 2
        rejected = []
        for a, b in zip(pool[0::2].tolist(), pool[1::2].tolist()):
            if ok(a, b):
                e = (a, b) if a < b else (b, a)
                edges.add(e)
                out.append(e)
            else:
                rejected.extend((a, b))
        stalled = stalled + 1 if len(rejected) == len(pool) else 0
        pool = np.concatenate([np.array(rejected, dtype=np.int64), left])

    rest = pool.tolist()
    fails = 0
    while len(rest) > 1 and out and attempts < budget and fails < SWAP_PATIENCE:
        attempts += 1
        fails += 1
        a, b = rest[-1], rest[-2]
        j = int(rng.integers(len(out)))
        c, d = out[j]
        if rng.random() < 0.5:
            c, d = d, c
        edges.discard(out[j])
        if ok(a, c) and ok(b, d) and (a, c) != (d, b) and {a, c} != {b, d}:
            e1 = (a, c) if a < c else (c, a)
            e2 = (b, d) if b < d else (d, b)
            edges.add(e1)
            edges.add(e2)
            out[j] = e1
            out.append(e2)
            rest = rest[:-2]
            fails = 0
        else:
            edges.add(out[j])
    return out


def generate_lfr(p: LfrParams) -> tuple[Graph, Partition]:
    """Generate one benchmark graph and its planted partition."""
    p.validate()
    rng = np.random.default_rng(p.seed)
    last_error = None
    for _ in range(MAX_RETRIES):
        deg = _degrees(p, rng)
        k_in = np.rint((1.0 - p.mixing) * deg).astype(np.int64)
        try:
            sizes = _community_sizes(p, k_in, rng)
        except InfeasibleError as exc:
            last_error = exc
            continue
        member = _assign_nodes(k_in, sizes, rng)
        if member is None:
            last_error = InfeasibleError("could not place every node in a large enough community")
            continue
        break
    else:
        raise last_error

    edges: set = set()
    internal = []
    for c in range(len(sizes)):
        nodes = np.flatnonzero(member == c)
        stubs = np.repeat(nodes, k_in[nodes])
        if len(stubs) % 2:
            stubs = stubs[:-1]
        internal.extend(_match(stubs, rng, edges))
    k_ext = deg - k_in
    ext_stubs = np.repeat(np.arange(p.n), k_ext)
    external = _match(ext_stubs, rng, edges, forbid_comm=member) if p.mixing > 0 else []
    all_edges = np.array(internal + external, dtype=np.int64).reshape(-1, 2)
    g = Graph(p.n, all_edges[:, 0], all_edges[:, 1])
    return g, Partition(member)


def empirical_mixing(g: Graph, truth: Partition) -> float:
    """Fraction of edges whose endpoints lie in different communities."""
    if g.n_edges == 0:
        return 0.0
    lab = truth.labels
    return float(np.mean(lab[g.edges[:, 0]] != lab[g.edges[:, 1]]))


@dataclass
class GridSpec:
    """Value lists per parameter; the grid is their cartesian product times ``replicates``."""

    n: list = field(default_factory=lambda: [100, 500, 750, 1000, 2500, 5000, 10000])
    avg_deg: list = field(default_factory=lambda: [15, 30, 50])
    max_deg: list = field(default_factory=lambda: [10, 50, 100, 500])
    mixing: list = field(default_factory=lambda: [0.1, 0.2, 0.5, 0.7, 0.9])
    degree_exp: list = field(default_factory=lambda: [2.0])
    comm_exp: list = field(default_factory=lambda: [1.0])
    replicates: int = 1
    seed: int = 0

    def combinations(self) -> Iterator[tuple[int, LfrParams]]:
        prod = itertools.product(self.n, self.avg_deg, self.max_deg, self.mixing,
                                 self.degree_exp, self.comm_exp, range(self.replicates))
        for idx, (n, ad, md, mu, de, ce, _) in enumerate(prod):
            seed = int(np.random.SeedSequence([self.seed, idx]).generate_state(1)[0])
            yield idx, LfrParams(n=int(n), avg_deg=float(ad), max_deg=int(md), mixing=float(mu),
                                 degree_exp=float(de), comm_exp=float(ce), seed=seed)


def generate_grid(grid: GridSpec, skipped: list | None = None
                  ) -> Iterator[tuple[LfrParams, Graph, Partition]]:
    """Yield every feasible grid cell; infeasible ones are logged and appended to ``skipped``."""
    for idx, params in grid.combinations():
        try:
            g, truth = generate_lfr(params)
        except InfeasibleError as exc:
            log.info("grid cell %d skipped: %s", idx, exc)
            if skipped is not None:
                skipped.append((idx, params, str(exc)))
            continue
        yield params, g, truth


MANIFEST_COLUMNS = ("index", "n", "avg_deg", "max_deg", "mixing", "degree_exp", "comm_exp",
                    "seed", "edges", "truth", "empirical_mixing", "status")


def write_grid(grid: GridSpec, run_dir, header: str = "") -> list[dict]:
    """Write ``net_XXXX.edges``/``net_XXXX.truth`` files and ``manifest.tsv`` into ``run_dir``."""
    os.makedirs(run_dir, exist_ok=True)
    rows = []
    for idx, params in grid.combinations():
        row = {k: v for k, v in asdict(params).items() if k in MANIFEST_COLUMNS}
        row["index"] = idx
        try:
            g, truth = generate_lfr(params)
        except InfeasibleError as exc:
            row.update(edges="-", truth="-", empirical_mixing="-", status=f"infeasible: {exc}")
            rows.append(row)
            continue
        stem = f"net_{idx:04d}"
        write_edge_list(g, os.path.join(run_dir, stem + ".edges"))
        write_partition(truth, g.tokens, os.path.join(run_dir, stem + ".truth"))
        row.update(edges=stem + ".edges", truth=stem + ".truth",
                   empirical_mixing=f"{empirical_mixing(g, truth):.6f}", status="ok")
        rows.append(row)
    with open(os.path.join(run_dir, "manifest.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(header)
        fh.write("\t".join(MANIFEST_COLUMNS) + "\n")
        for row in rows:
            fh.write("\t".join(str(row[c]) for c in MANIFEST_COLUMNS) + "\n")
    return rows


def read_manifest(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    cols = lines[0].split("\t")
    return [dict(zip(cols, ln.split("\t"))) for ln in lines[1:]]
