"""Acceptance checks, one test per criterion.

Each test prints a single ``[acceptance N] PASS|FAIL|SKIP: ...`` line to the
terminal (also without ``-s``) and then asserts at the stated tolerance.

Criterion 3 needs the 1005-node e-mail network with department labels:
point ``SCD_EMAIL_EDGES`` at its edge list and ``SCD_EMAIL_LABELS`` at a
``node label`` file to enable it.
"""

import functools
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from scd.baselines import louvain
from scd.embedding import EmbeddingParams, PprParams
from scd.graph import Graph, load_edge_list, load_partition
from scd.kmeans import minibatch_kmeans
from scd.lfr import GridSpec, generate_grid
from scd.metrics import ari, modularity, nmi
from scd.netmf import netmf_embed, netmf_target
from scd.ppr import ppr_vector
from scd.search import (SearchConfig, cluster_seed, effective_k_min, gamma_estimate, scd_detect)
from scd.silhouette import normalize_scores, silhouette_global, silhouette_samples

from conftest import random_graph, two_triangles
from test_metrics import naive_modularity
from test_netmf import dense_target
from test_ppr import solve_ppr
from test_silhouette import naive_silhouette

FAST = [EmbeddingParams(backend="netmf", window=5, negative=1, dim=32)]
DESK_N = [100, 500, 1000]
DESK_SEEDS = 5


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, skipped=False):
        status = "SKIP" if skipped else ("PASS" if ok else "FAIL")
        with capsys.disabled():
            print(f"\n[acceptance {n}] {status}: {detail}")
        if skipped:
            pytest.skip(detail)
        assert ok, detail
    return emit


@functools.lru_cache(maxsize=None)
def desk_grid(mu: float):
    """SCD (fast preset) and Louvain NMI on every cell of the desk-scale grid."""
    grid = GridSpec(n=DESK_N, avg_deg=[15], max_deg=[50], mixing=[mu], replicates=DESK_SEEDS, seed=0)
    rows = []
    t0 = time.perf_counter()
    for params, g, truth in generate_grid(grid):
        p, _ = scd_detect(g, SearchConfig(list(FAST), seed=0))
        rows.append((params.n, nmi(truth, p), nmi(truth, louvain(g, rng=0))))
    return rows, time.perf_counter() - t0


def test_criterion_01_low_mixing_grid(report):
    rows, seconds = desk_grid(0.1)
    scd_mean = float(np.mean([r[1] for r in rows]))
    louv_mean = float(np.mean([r[2] for r in rows]))
    ok = len(rows) == len(DESK_N) * DESK_SEEDS and scd_mean >= 0.85 and louv_mean >= 0.90 and seconds <= 600
    report(1, ok, f"{len(rows)} graphs, SCD-NetMF NMI {scd_mean:.3f} (>= 0.85), "
                  f"Louvain NMI {louv_mean:.3f} (>= 0.90), {seconds:.0f}s (<= 600s)")


def test_criterion_02_mixing_trend(report):
    means = [float(np.mean([r[1] for r in desk_grid(mu)[0]])) for mu in (0.1, 0.5, 0.9)]
    ok = means[0] >= means[1] >= means[2]
    report(2, ok, "SCD-NetMF mean NMI at mixing 0.1/0.5/0.9 = " + " / ".join(f"{m:.3f}" for m in means))


def test_criterion_03_email_network(report):
    edges, labels = os.environ.get("SCD_EMAIL_EDGES"), os.environ.get("SCD_EMAIL_LABELS")
    if not (edges and labels and os.path.exists(edges) and os.path.exists(labels)):
        report(3, False, "e-mail network not supplied (set SCD_EMAIL_EDGES and SCD_EMAIL_LABELS)",
               skipped=True)
    g = load_edge_list(edges)
    truth = load_partition(labels, g.index)
    results = []
    for d in (32, 128):
        p, r = scd_detect(g, SearchConfig([EmbeddingParams(window=5, negative=1, dim=d)], seed=0))
        results.append((d, nmi(truth, p), p.n_communities))
    ok = all(score >= 0.60 and 25 <= k <= 60 for _, score, k in results)
    report(3, ok, ", ".join(f"d={d}: NMI {s:.3f}, {k} communities" for d, s, k in results))


def ring_of_cliques(n_cliques: int, size: int) -> Graph:
    u, v = [], []
    for b in range(n_cliques):
        base = b * size
        for i in range(size):
            for j in range(i + 1, size):
                u.append(base + i)
                v.append(base + j)
        u.append(base + size - 1)
        v.append(((b + 1) % n_cliques) * size)
    return Graph(n_cliques * size, u, v)


def test_criterion_04_step_insensitivity(report):
    g = ring_of_cliques(50, 6)
    gamma = gamma_estimate(g.n_nodes)
    ks = {}
    for step in (1, gamma, 2 * gamma):
        _, r = scd_detect(g, SearchConfig(list(FAST), gamma=step, seed=0))
        ks[step] = r.chosen_k
    spread = (max(ks.values()) - min(ks.values())) / min(ks.values())
    ok = spread <= 0.20 and gamma_estimate(1000) == 100
    report(4, ok, f"ring of 50 6-cliques, chosen k per step {ks}, relative spread {spread:.3f} (<= 0.20); "
                  f"gamma_estimate(1000) = {gamma_estimate(1000)}")


def test_criterion_05_brute_force_equivalence(report):
    mismatches = []
    rng = np.random.default_rng(2024)
    for trial in range(10):
        n = int(rng.integers(12, 61))
        g = random_graph(int(rng.integers(2**31)), n, float(rng.uniform(0.08, 0.3)))
        g = g.subgraph(np.flatnonzero(~g.isolated()))
        params = EmbeddingParams(window=3, negative=1, dim=min(16, g.n_nodes))
        K = g.n_nodes
        krange = list(range(effective_k_min(5, K), K + 1))
        _, r = scd_detect(g, SearchConfig([params], gamma=1, w=len(krange), seed=trial))
        X = netmf_embed(g, params).matrix
        best_q, best_k = -math.inf, None
        for k in krange:
            try:
                q = silhouette_global(X, minibatch_kmeans(X, k, rng=cluster_seed(trial, 0, k)).labels)
            except ValueError:
                continue
            if q > best_q:
                best_q, best_k = q, k
        if (r.chosen_k, r.quality) != (best_k, best_q):
            mismatches.append((trial, r.chosen_k, best_k))
    report(5, not mismatches, f"10 graphs, exact (k, quality) matches: {10 - len(mismatches)}/10 {mismatches or ''}")


def test_criterion_06_metrics(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 101))
        g = random_graph(int(rng.integers(2**31)), n, float(rng.uniform(0.03, 0.5)), weighted=bool(rng.random() < 0.5))
        if g.n_edges == 0:
            g = Graph(n, [0], [1])
        labels = rng.integers(0, int(rng.integers(1, 10)), n)
        worst = max(worst, abs(modularity(g, labels) - naive_modularity(g, labels)))
    tri_q = modularity(two_triangles(), [0, 0, 0, 1, 1, 1])
    ari_val = ari([0, 0, 1, 1], [0, 1, 0, 1])
    perm_ok = True
    for _ in range(1000):
        n = int(rng.integers(2, 80))
        y = rng.integers(0, int(rng.integers(1, 9)), n)
        c = rng.integers(0, int(rng.integers(1, 9)), n)
        perm = rng.permutation(n)
        base = nmi(y, c)
        perm_ok &= nmi(y[perm], c[perm]) == base and nmi(rng.permutation(9)[y], c) == base
    ok = worst <= 1e-9 and tri_q == 0.5 and ari_val == -0.5 and perm_ok
    report(6, ok, f"modularity vs double sum max err {worst:.1e} (<= 1e-9); two triangles Q = {tri_q!r}; "
                  f"ARI = {ari_val!r}; NMI permutation invariance over 1000 cases: {perm_ok}")


def test_criterion_07_silhouette(report):
    rng = np.random.default_rng(7)
    in_bounds = True
    for _ in range(1000):
        n = int(rng.integers(2, 50))
        X = rng.normal(size=(n, int(rng.integers(1, 5)))) * rng.choice([1e-3, 1.0, 1e3])
        labels = rng.integers(0, int(rng.integers(2, n + 1)), n)
        labels[:2] = [0, 1]
        s = silhouette_samples(X, labels).per_point
        in_bounds &= bool(s.min() >= -1.0 and s.max() <= 1.0)
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 201))
        X = rng.normal(size=(n, int(rng.integers(1, 8))))
        labels = rng.integers(0, int(rng.integers(2, 12)), n)
        labels[:2] = [0, 1]
        worst = max(worst, float(np.abs(silhouette_samples(X, labels).per_point - naive_silhouette(X, labels)).max()))
    argmax_ok = True
    for _ in range(1000):
        vals = rng.normal(size=int(rng.integers(2, 30)))
        if rng.random() < 0.3:
            vals = np.round(vals, 1)
        norm, degenerate = normalize_scores(list(enumerate(vals)))
        argmax_ok &= degenerate or int(np.argmax([v for _, v in norm])) == int(np.argmax(vals))
    ok = in_bounds and worst <= 1e-9 and argmax_ok
    report(7, ok, f"s(i) in [-1, 1] on 1000 instances: {in_bounds}; blocked vs naive max err {worst:.1e} "
                  f"(<= 1e-9); normalization keeps argmax: {argmax_ok}")


def test_criterion_08_netmf(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(2, 51))
        g = random_graph(int(rng.integers(2**31)), n, float(rng.uniform(0.05, 0.6)), weighted=bool(rng.random() < 0.5))
        T, b = int(rng.choice([1, 2, 5, 10])), int(rng.choice([1, 5, 20]))
        worst = max(worst, float(np.abs(netmf_target(g, T, b) - dense_target(g, T, b)).max()))
    k2 = float(netmf_target(Graph(2, [0], [1]), 1, 1)[0, 1])
    k2_err = abs(k2 - math.log(2))
    ok = worst <= 1e-9 and k2_err <= 1e-12
    report(8, ok, f"target vs dense transcription max err {worst:.1e} (<= 1e-9); "
                  f"K2 entry {k2!r}, |err vs ln 2| = {k2_err:.1e} (<= 1e-12)")


def test_criterion_09_ppr(report):
    rng = np.random.default_rng(9)
    params = PprParams(alpha=0.85, tol=1e-6, max_iter=1000)
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(2, 31))
        g = random_graph(int(rng.integers(2**31)), n, float(rng.uniform(0.05, 0.6)), weighted=bool(rng.random() < 0.5))
        for u in range(n):
            worst = max(worst, float(np.abs(ppr_vector(g, u, params)[0] - solve_ppr(g, u, 0.85)).max()))
    x, _ = ppr_vector(Graph(2, [0], [1]), 0, PprParams(alpha=0.85))
    k2_ok = abs(x[0] - 0.5405) <= 1e-4 and abs(x[1] - 0.4594) <= 1e-4
    ok = worst <= 10 * params.tol and k2_ok
    report(9, ok, f"power iteration vs linear solve max err {worst:.1e} (<= {10 * params.tol:.0e}); "
                  f"K2 vector ({x[0]:.4f}, {x[1]:.4f})")


def _cli(args, threads, cwd):
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    cmd = [sys.executable, "-m", "scd.cli", *map(str, args), "--threads", str(threads)]
    return subprocess.run(cmd, cwd=cwd, env=env, capture_output=True, timeout=600)


def test_criterion_10_cli_determinism(report, tmp_path):
    setup = tmp_path / "setup"
    res = _cli(["generate", "--out", setup, "--n", 150, "--avg-deg", 10, "--max-deg", 30,
                "--mixing", 0.2, "--seed", 1], 1, tmp_path)
    assert res.returncode == 0, res.stderr.decode()
    graph, truth = setup / "net_0000.edges", setup / "net_0000.truth"
    commands = {
        "generate": ["generate", "--out", "run", "--n", "120,150", "--avg-deg", 8,
                     "--max-deg", 25, "--mixing", "0.1,0.3", "--seed", 5],
        "embed": ["embed", graph, "--out", "emb.txt", "--dim", 16, "--seed", 5],
        "embed-ppr": ["embed", graph, "--out", "emb.txt", "--backend", "ppr"],
        "detect": ["detect", graph, "--out", "part.txt", "--report", "report.jsonl",
                   "--window", "3,5", "--dim", "16,32", "--normalize", "--seed", 5],
        "eval": ["eval", graph, truth, "--truth", truth, "--out", "eval.tsv", "--seed", 5],
        "bench": ["bench", "--n", 120, "--avg-deg", 8, "--max-deg", 25, "--mixing", "0.1,0.5",
                  "--replicates", 2, "--algorithms", "scd-netmf,louvain,lpa",
                  "--out", "bench.tsv", "--seed", 5],
        "sweep": ["sweep", graph, "--out", "sweep.tsv", "--step", 3, "--seed", 5],
    }
    unstable = []
    for name, args in commands.items():
        snapshots = []
        for threads in (1, 4):
            for rep in range(3):
                out = tmp_path / f"{name}-{threads}-{rep}"
                out.mkdir()
                res = _cli(args, threads, out)
                if res.returncode != 0:
                    unstable.append(f"{name}: exit {res.returncode} {res.stderr.decode()[-200:]}")
                    break
                files = {p.relative_to(out).as_posix(): p.read_bytes()
                         for p in sorted(out.rglob("*")) if p.is_file()}
                snapshots.append((files, res.stdout))
        if len({repr(s) for s in snapshots}) != 1:
            unstable.append(name)
    report(10, not unstable, f"{len(commands)} commands x 3 runs x threads {{1, 4}}: "
                             + ("all outputs byte-identical" if not unstable else f"differences in {unstable}"))
