"""Command-line front end: ``scd generate|embed|detect|eval|bench|sweep``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from ._accel import set_num_threads
from .baselines import label_propagation, louvain
from .embedding import EmbeddingParams, PprParams, write_embedding
from .graph import GraphFormatError, load_edge_list, load_partition, write_partition
from .kmeans import ClusteringError
from .lfr import GridSpec, InfeasibleError, generate_grid, write_grid
from .metrics import evaluate
from .netmf import DenseLimitError
from .search import (SearchConfig, SearchError, effective_k_min, embed,
                     scd_detect, sweep, valid_range)
from .silhouette import SilhouetteError, normalize_scores

log = logging.getLogger("scd")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

# Keys left out of the config hash: they do not change results.
_UNHASHED = {"command", "config", "graph", "out", "report", "pred", "truth", "threads",
             "timings", "verbose", "trace"}

PAPER_NEGATIVE = (1, 5, 20)
PAPER_WINDOW = (1, 3, 5, 10, 30, 50)
PAPER_DIM = (16, 32, 64, 128, 256)
FAST = ((1,), (5,), (32,))

ALGORITHMS = ("scd-netmf", "scd-ppr", "louvain", "lpa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_common(p):
    p.add_argument("--config", help="JSON file of option defaults; flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_embedding(p, grid: bool):
    p.add_argument("--backend", choices=("netmf", "ppr"), default="netmf")
    if grid:
        p.add_argument("--window", type=_int_list, default=None, help="comma list (default: full grid)")
        p.add_argument("--negative", type=_int_list, default=None, help="comma list (default: full grid)")
        p.add_argument("--dim", type=_int_list, default=None, help="comma list (default: full grid)")
        p.add_argument("--fast", action="store_true", help="single parameter set b=1, T=5, d=32")
    else:
        p.add_argument("--window", type=int, default=5)
        p.add_argument("--negative", type=int, default=1)
        p.add_argument("--dim", type=int, default=32)
    p.add_argument("--alpha", type=float, default=0.85, help="PPR restart complement")
    p.add_argument("--tol", type=float, default=1e-6, help="PPR L1 tolerance")
    p.add_argument("--max-iter", type=int, default=100, help="PPR iteration cap")
    p.add_argument("--no-truncate", action="store_true", help="keep log of entries below 1 in the NetMF target")


def _add_search(p):
    p.add_argument("--K", type=int, default=None, help="largest k (default: node count)")
    p.add_argument("--gamma", type=int, default=0, help="coarse step (0: automatic)")
    p.add_argument("--w", type=int, default=5, help="coarse-sweep patience")
    p.add_argument("--k-min", type=int, default=5)
    p.add_argument("--fine-radius", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--kmeans-iters", type=int, default=100)
    p.add_argument("--silhouette-sample", type=int, default=None)
    p.add_argument("--normalize", action="store_true", help="report normalized silhouettes")


def _add_grid(p, desk: bool):
    d = dict(n=[100, 500, 1000], avg_deg=[15.0], max_deg=[50], mixing=[0.1, 0.5, 0.9], replicates=5) \
        if desk else dict(n=GridSpec().n, avg_deg=GridSpec().avg_deg, max_deg=GridSpec().max_deg,
                          mixing=GridSpec().mixing, replicates=1)
    p.add_argument("--n", type=_int_list, default=d["n"])
    p.add_argument("--avg-deg", type=_float_list, default=d["avg_deg"])
    p.add_argument("--max-deg", type=_int_list, default=d["max_deg"])
    p.add_argument("--mixing", type=_float_list, default=d["mixing"])
    p.add_argument("--degree-exp", type=_float_list, default=[2.0])
    p.add_argument("--comm-exp", type=_float_list, default=[1.0])
    p.add_argument("--replicates", type=int, default=d["replicates"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scd", description="Silhouette-driven community detection on node embeddings.")
    parser.add_argument("--version", action="version", version=f"scd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a grid of LFR-style benchmark graphs")
    p.add_argument("--out", required=True, help="run directory")
    _add_grid(p, desk=False)
    _add_common(p)

    p = sub.add_parser("embed", help="compute one node embedding")
    p.add_argument("graph")
    p.add_argument("--out", required=True)
    _add_embedding(p, grid=False)
    _add_common(p)

    p = sub.add_parser("detect", help="detect communities")
    p.add_argument("graph")
    p.add_argument("--out", required=True, help="partition file")
    p.add_argument("--report", default=None, help="search report (JSON lines)")
    p.add_argument("--timings", action="store_true", help="record wall-clock millis in the report")
    _add_embedding(p, grid=True)
    _add_search(p)
    _add_common(p)

    p = sub.add_parser("eval", help="score a partition")
    p.add_argument("graph")
    p.add_argument("pred")
    p.add_argument("--truth", default=None)
    p.add_argument("--out", default=None, help="also write the records to this file")
    _add_common(p)

    p = sub.add_parser("bench", help="average scores per mixing level over a generated grid")
    p.add_argument("--algorithms", type=_str_list, default=["scd-netmf", "louvain", "lpa"],
                   help=f"comma list from {', '.join(ALGORITHMS)}")
    p.add_argument("--out", default=None, help="machine-readable records (TSV)")
    _add_grid(p, desk=True)
    _add_embedding(p, grid=True)
    _add_search(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="silhouette for every k of a range")
    p.add_argument("graph")
    p.add_argument("--out", default=None, help="trace file (default: stdout)")
    p.add_argument("--step", type=int, default=1)
    _add_embedding(p, grid=False)
    _add_search(p)
    _add_common(p)
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for key in cfg:
            if key not in known or key in ("help", "config"):
                raise UsageError(f"config {args.config}: unknown field {key!r} for '{args.command}'")
        for action in sub._actions:
            if action.dest in cfg and action.type in (_int_list, _float_list, _str_list):
                v = cfg[action.dest]
                cfg[action.dest] = list(v) if isinstance(v, list) else action.type(str(v))
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(a) -> None:
    def need(cond, field, msg):
        if not cond:
            raise UsageError(f"--{field.replace('_', '-')}: {msg}")

    need(a.threads >= 1, "threads", "must be >= 1")
    if hasattr(a, "backend"):
        for name in ("window", "negative", "dim"):
            v = getattr(a, name)
            vals = v if isinstance(v, list) else ([] if v is None else [v])
            need(all(x >= 1 for x in vals), name, "values must be >= 1")
        need(0.0 < a.alpha < 1.0, "alpha", "must lie in (0, 1)")
        need(a.tol > 0, "tol", "must be > 0")
        need(a.max_iter >= 1, "max_iter", "must be >= 1")
    if hasattr(a, "w"):
        need(a.w >= 1, "w", "must be >= 1")
        need(a.k_min >= 2, "k_min", "must be >= 2")
        need(a.gamma >= 0, "gamma", "must be >= 0")
        need(a.K is None or a.K >= a.k_min, "K", "must be >= --k-min")
        need(a.fine_radius is None or a.fine_radius >= 0, "fine_radius", "must be >= 0")
        need(a.batch_size is None or a.batch_size >= 1, "batch_size", "must be >= 1")
        need(a.kmeans_iters >= 1, "kmeans_iters", "must be >= 1")
        need(a.silhouette_sample is None or a.silhouette_sample >= 2, "silhouette_sample", "must be >= 2")
    if hasattr(a, "replicates"):
        need(a.replicates >= 1, "replicates", "must be >= 1")
        need(all(0.0 <= m <= 1.0 for m in a.mixing), "mixing", "values must lie in [0, 1]")
        need(all(x >= 2 for x in a.n), "n", "values must be >= 2")
    if hasattr(a, "step"):
        need(a.step >= 1, "step", "must be >= 1")
    if hasattr(a, "algorithms"):
        bad = [x for x in a.algorithms if x not in ALGORITHMS]
        need(a.algorithms and not bad, "algorithms", f"unknown {bad}, choose from {', '.join(ALGORITHMS)}")


def config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _UNHASHED}
    blob = json.dumps({"command": args.command, **cfg}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def header(args) -> str:
    return f"# scd {__version__} config={config_hash(args)} seed={args.seed}\n"


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _param_sets(a) -> list[EmbeddingParams]:
    if a.backend == "ppr":
        return [EmbeddingParams(backend="ppr", seed=a.seed)]
    if getattr(a, "fast", False):
        neg, win, dim = FAST
    else:
        neg, win, dim = PAPER_NEGATIVE, PAPER_WINDOW, PAPER_DIM
    neg = a.negative or neg
    win = a.window or win
    dim = a.dim or dim
    return [EmbeddingParams(backend="netmf", window=t, negative=b, dim=d, seed=a.seed)
            for b in neg for t in win for d in dim]


def _ppr(a) -> PprParams:
    return PprParams(alpha=a.alpha, tol=a.tol, max_iter=a.max_iter)


def _search_config(a, param_sets=None) -> SearchConfig:
    return SearchConfig(param_sets=param_sets or _param_sets(a), K=a.K, gamma=a.gamma, w=a.w,
                        k_min=a.k_min, normalize=a.normalize, seed=a.seed,
                        fine_radius=a.fine_radius, batch_size=a.batch_size,
                        max_iters=a.kmeans_iters, ppr=_ppr(a),
                        silhouette_sample=a.silhouette_sample, truncate=not a.no_truncate)


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.6f}"


# -- commands ---------------------------------------------------------------

def cmd_generate(a) -> int:
    grid = GridSpec(n=a.n, avg_deg=a.avg_deg, max_deg=a.max_deg, mixing=a.mixing,
                    degree_exp=a.degree_exp, comm_exp=a.comm_exp, replicates=a.replicates, seed=a.seed)
    rows = write_grid(grid, a.out, header=header(a))
    ok = sum(r["status"] == "ok" for r in rows)
    print(f"wrote {ok} of {len(rows)} networks to {a.out}")
    return EXIT_OK


def cmd_embed(a) -> int:
    g = load_edge_list(a.graph)
    params = EmbeddingParams(backend=a.backend, window=a.window, negative=a.negative,
                             dim=a.dim, seed=a.seed)
    emb = embed(g, params, _ppr(a), truncate=not a.no_truncate)
    write_embedding(emb, a.out)
    if emb.unconverged:
        log.warning("%d PPR source(s) did not converge", len(emb.unconverged))
    return EXIT_OK


def report_lines(report, timings: bool = False) -> list[str]:
    """One JSON record per evaluation, then a summary record."""
    out = []
    for e in report.evaluations:
        rec = {"param": e.param_index, "k": e.k, "silhouette": e.silhouette,
               "normalized": e.normalized, "phase": e.phase,
               "millis": round(e.millis, 3) if timings else None}
        if e.error:
            rec["error"] = e.error
        out.append(json.dumps(rec))
    summary = {"summary": True, "chosen_param": report.chosen_param,
               "chosen_params": report.params[report.chosen_param].as_dict(),
               "k": report.chosen_k, "quality": report.quality, "K": report.K,
               "gamma": report.gamma, "k_min": report.k_min,
               "isolated_singletons": len(report.isolated),
               "embed_errors": {str(k): v for k, v in report.embed_errors.items()}}
    if timings:
        summary["stage_seconds"] = {k: round(v, 4) for k, v in report.stage_seconds.items()}
    out.append(json.dumps(summary))
    return out


def cmd_detect(a) -> int:
    g = load_edge_list(a.graph)
    part, report = scd_detect(g, _search_config(a))
    write_partition(part, g.tokens, a.out)
    if a.report:
        _write(a.report, header(a) + "".join(line + "\n" for line in report_lines(report, a.timings)))
    print(f"{part.n_communities} communities (k={report.chosen_k}, silhouette={report.quality:.6f})")
    return EXIT_OK


def cmd_eval(a) -> int:
    g = load_edge_list(a.graph)
    pred = load_partition(a.pred, g.index)
    truth = load_partition(a.truth, g.index) if a.truth else None
    scores = evaluate(g, pred, truth)
    text = "".join(f"{name}\t{val:.6f}\n" for name, val in scores.records())
    sys.stdout.write(text)
    if a.out:
        _write(a.out, header(a) + text)
    return EXIT_OK


def _run_algorithm(name, g, a, seed):
    if name == "louvain":
        return louvain(g, rng=seed)
    if name == "lpa":
        return label_propagation(g, rng=seed)
    backend = "ppr" if name == "scd-ppr" else "netmf"
    ns = argparse.Namespace(**{**vars(a), "backend": backend, "seed": seed})
    return scd_detect(g, _search_config(ns))[0]


def cmd_bench(a) -> int:
    grid = GridSpec(n=a.n, avg_deg=a.avg_deg, max_deg=a.max_deg, mixing=a.mixing,
                    degree_exp=a.degree_exp, comm_exp=a.comm_exp, replicates=a.replicates, seed=a.seed)
    if a.window is None and a.negative is None and a.dim is None:
        a.fast = True  # the full parameter grid is opt-in here
    skipped: list = []
    scores: dict = {(mu, alg): [] for mu in a.mixing for alg in a.algorithms}
    failed: dict = {key: 0 for key in scores}
    for cell, (params, g, truth) in enumerate(generate_grid(grid, skipped)):
        seed = int(np.random.SeedSequence([a.seed, cell]).generate_state(1)[0])
        for alg in a.algorithms:
            try:
                pred = _run_algorithm(alg, g, a, seed)
                s = evaluate(g, pred, truth)
            except (ValueError, RuntimeError, MemoryError) as exc:
                log.warning("cell %d (%s) failed: %s", cell, alg, exc)
                failed[(params.mixing, alg)] += 1
                continue
            scores[(params.mixing, alg)].append((s.nmi, s.ari, s.modularity))
            log.info("cell %d mu=%.2f n=%d %s nmi=%.4f", cell, params.mixing, params.n, alg, s.nmi)
    if skipped:
        log.warning("%d grid cell(s) infeasible and skipped", len(skipped))

    cols = ("mixing", "algorithm", "cells", "failed", "nmi_mean", "nmi_std",
            "ari_mean", "ari_std", "mod_mean", "mod_std")
    records = []
    for (mu, alg), vals in scores.items():
        arr = np.array(vals, dtype=np.float64).reshape(-1, 3)
        mean = arr.mean(axis=0) if len(arr) else np.full(3, np.nan)
        std = arr.std(axis=0) if len(arr) else np.full(3, np.nan)
        records.append((f"{mu:g}", alg, str(len(arr)), str(failed[(mu, alg)]),
                        *(f"{x:.6f}" for pair in zip(mean, std) for x in pair)))
    table = [cols] + records
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    pretty = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    print("\n".join(pretty))
    if a.out:
        _write(a.out, header(a) + "".join("\t".join(r) + "\n" for r in table))
    return EXIT_OK


def cmd_sweep(a) -> int:
    g = load_edge_list(a.graph)
    if g.isolated().any():
        log.warning("%d isolated node(s) left out of the sweep", int(g.isolated().sum()))
        g = g.subgraph(np.flatnonzero(~g.isolated()))
    params = EmbeddingParams(backend=a.backend, window=a.window, negative=a.negative,
                             dim=a.dim, seed=a.seed)
    emb = embed(g, params, _ppr(a), truncate=not a.no_truncate)
    K = min(a.K or g.n_nodes, g.n_nodes)
    cfg = _search_config(a, [params])
    trace = sweep(emb, valid_range(K, a.step, effective_k_min(a.k_min, K)), config=cfg)
    ok = [(k, q) for k, q in trace if q is not None]
    norm = dict(normalize_scores(ok)[0])
    text = header(a) + "k\tsilhouette\tnormalized\n" + "".join(
        f"{k}\t{_fmt(q)}\t{_fmt(norm.get(k))}\n" for k, q in trace)
    if a.out:
        _write(a.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "embed": cmd_embed, "detect": cmd_detect,
            "eval": cmd_eval, "bench": cmd_bench, "sweep": cmd_sweep}

DATA_ERRORS = (OSError, GraphFormatError, InfeasibleError, SearchError, ClusteringError,
               SilhouetteError, DenseLimitError)


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"scd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    set_num_threads(args.threads)
    try:
        # BLAS stays single-threaded so float reductions never depend on --threads
        with threadpool_limits(limits=1):
            return COMMANDS[args.command](args)
    except DATA_ERRORS as exc:
        print(f"scd: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"scd: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        log.exception("internal error")
        print(f"scd: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
