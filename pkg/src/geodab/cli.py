"""Command-line interface: generate, build, query, motif, shard-stats, eval, bench.

Machine-readable CSV goes to stdout, diagnostics to stderr. Exit codes:
0 success, 1 usage error, 2 data or format error. Extraction parameters
resolve as flags > ``GDAB_*`` environment variables > built-in defaults
(k=6, t=12, depth=36, prefix bits=16).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from dataclasses import dataclass
from typing import List, Optional

from . import baseline, datagen, evaluate, motif as motif_mod, shard as shard_mod
from .index import GeodabIndex, IndexFormatError
from .io import TrajectoryFormatError, read_trajectories, read_truth

USAGE_ERROR = 1
DATA_ERROR = 2

_ENV_DEFAULTS = {
    "kgram_size": ("GDAB_K", 6),
    "guarantee_threshold": ("GDAB_T", 12),
    "depth": ("GDAB_DEPTH", 36),
    "prefix_bits": ("GDAB_PREFIX_BITS", 16),
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2
    # for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Validated per-invocation settings shared by the subcommands."""

    kgram_size: int
    guarantee_threshold: int
    depth: int
    prefix_bits: int
    threads: int = 1

    def index(self) -> GeodabIndex:
        return GeodabIndex(self.kgram_size, self.guarantee_threshold, self.depth, self.prefix_bits)


def _env_int(name: str, fallback: int) -> int:
    value = os.environ.get(name)
    if value is None:
        return fallback
    try:
        return int(value)
    except ValueError:
        raise SystemExit(f"environment variable {name}={value!r} is not an integer")


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-k", "--kgram-size", type=int, default=None, help="noise threshold in cells (default 6)")
    parser.add_argument(
        "-t", "--guarantee-threshold", type=int, default=None, help="detection threshold in cells (default 12)"
    )
    parser.add_argument("--depth", type=int, default=None, help="normalization depth in bits (default 36)")
    parser.add_argument("--prefix-bits", type=int, default=None, help="geohash prefix bits per geodab (default 16)")


def _run_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    resolved = {}
    for attr, (env, default) in _ENV_DEFAULTS.items():
        flag = getattr(args, attr, None)
        resolved[attr] = flag if flag is not None else _env_int(env, default)
    cfg = RunConfig(threads=_env_int("GDAB_THREADS", 1), **resolved)
    if cfg.threads < 1:
        parser.error("GDAB_THREADS must be >= 1")
    try:
        cfg.index()  # validates the parameter combination up front
    except ValueError as exc:
        parser.error(str(exc))
    return cfg


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part]


def build_parser() -> _Parser:
    parser = _Parser(prog="geodab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset (trajectories, queries, ground truth)")
    p.add_argument("--seed", type=int, default=int(os.environ.get("GDAB_SEED", 7)))
    p.add_argument("--routes", type=int, default=50)
    p.add_argument("--traj-per-direction", type=int, default=10)
    p.add_argument("--noise-sigma", type=float, default=20.0, help="per-axis Gaussian noise in meters")
    p.add_argument("--speed", type=float, default=15.0, help="constant speed in m/s")
    p.add_argument("--sample-hz", type=float, default=1.0)
    p.add_argument("--min-route", type=float, default=4000.0, help="minimum route length in meters")
    p.add_argument("--grid-size", type=int, default=20)
    p.add_argument("--box", type=str, default=None, help="lat_min,lat_max,lon_min,lon_max")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("build", help="build a binary index from a trajectory file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--index", required=True)
    _add_param_flags(p)

    p = sub.add_parser("query", help="ranked retrieval; CSV: query_id,rank,id,jaccard_distance")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True, help="trajectory file with one or more queries")
    p.add_argument("--dmax", type=float, default=float(os.environ.get("GDAB_DMAX", 1.0)))
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("motif", help="closest same-length sub-trajectory pair of two trajectories")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--i", dest="first", required=True, help="first trajectory id")
    p.add_argument("--j", dest="second", required=True, help="second trajectory id")
    p.add_argument("--length", type=float, required=True, help="motif length in meters")
    p.add_argument("--method", choices=("geodab", "exact"), default="geodab")
    _add_param_flags(p)

    p = sub.add_parser("shard-stats", help="load distribution; CSV: level,key,count plus summary")
    p.add_argument("--index", required=True)
    p.add_argument("--shards", type=int, required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--shard-prefix-bits", type=int, default=16)

    p = sub.add_parser("eval", help="PR/ROC/AUC and query benchmarks against ground truth")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", required=True, help="output directory for pr.csv, roc.csv, auc.txt, bench.csv")
    p.add_argument("--depths", type=_int_list, default=None, help="normalization sweep, e.g. 28,32,36")
    p.add_argument("--bench-fractions", type=_int_list, default=None, help="percent subsets for bench.csv, e.g. 25,50,100")
    _add_param_flags(p)

    p = sub.add_parser("bench", help="distance-computation cost; CSV: method,t,c,millis")
    p.add_argument("--methods", type=str, default="dtw,dfd,jaccard")
    p.add_argument("--lengths", type=_int_list, default=[125, 250, 500, 1000])
    p.add_argument("--candidates", type=_int_list, default=[10])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "build": _cmd_build,
        "query": _cmd_query,
        "motif": _cmd_motif,
        "shard-stats": _cmd_shard_stats,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
    }[args.command]
    try:
        return handler(args, parser)
    except (TrajectoryFormatError, IndexFormatError, FileNotFoundError, ValueError) as exc:
        print(f"geodab: error: {exc}", file=sys.stderr)
        return DATA_ERROR


def _cmd_generate(args, parser) -> int:
    box = tuple(float(part) for part in args.box.split(",")) if args.box else GenBox
    if args.box and len(box) != 4:
        parser.error("--box expects lat_min,lat_max,lon_min,lon_max")
    cfg = datagen.GenConfig(
        seed=args.seed,
        num_routes=args.routes,
        traj_per_direction=args.traj_per_direction,
        sample_hz=args.sample_hz,
        noise_sigma_m=args.noise_sigma,
        speed_mps=args.speed,
        box=box,
        grid_size=args.grid_size,
        min_route_m=args.min_route,
    )
    dataset = datagen.generate(cfg)
    datagen.write_dataset(dataset, args.out)
    print(
        f"wrote {len(dataset.trajectories)} trajectories and {len(dataset.queries)} queries to {args.out}",
        file=sys.stderr,
    )
    return 0


GenBox = datagen.GenConfig().box


def _cmd_build(args, parser) -> int:
    cfg = _run_config(args, parser)
    trajectories = read_trajectories(args.input)
    if not trajectories:
        print(f"warning: {args.input} contains no trajectories; writing an empty index", file=sys.stderr)
    index = cfg.index()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        index.fit(trajectories)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    index.save(args.index)
    print(f"indexed {len(index)} trajectories, {index.num_terms} terms -> {args.index}", file=sys.stderr)
    return 0


def _cmd_query(args, parser) -> int:
    if not 0.0 <= args.dmax <= 1.0:
        parser.error(f"--dmax {args.dmax} outside [0, 1]")
    if args.limit is not None and args.limit < 1:
        parser.error("--limit must be >= 1")
    index = GeodabIndex.load(args.index)
    queries = read_trajectories(args.query)
    writer = csv.writer(sys.stdout)
    writer.writerow(["query_id", "rank", "id", "jaccard_distance"])
    for q in queries:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ranked = index.query(q, max_distance=args.dmax, limit=args.limit)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        for rank, (tid, d) in enumerate(ranked, start=1):
            writer.writerow([q.id, rank, tid, f"{d:.6f}"])
    return 0


def _cmd_motif(args, parser) -> int:
    if args.length <= 0:
        parser.error("--length must be positive meters")
    cfg = _run_config(args, parser)
    trajectories = read_trajectories(args.input)
    by_id = {t.id: t for t in trajectories}
    for tid in (args.first, args.second):
        if tid not in by_id:
            raise ValueError(f"trajectory {tid!r} not found in {args.input}")
    index = cfg.index().fit(trajectories)
    from .normalize import normalize

    if args.method == "geodab":
        density = motif_mod.estimate_density(index)
        seq_i = index.fingerprints(by_id[args.first])
        seq_j = index.fingerprints(by_id[args.second])
        result = motif_mod.motif_geodab(seq_i, seq_j, args.length, density, kgram_size=cfg.kgram_size)
    else:
        norm_i = normalize(by_id[args.first], cfg.depth).as_trajectory()
        norm_j = normalize(by_id[args.second], cfg.depth).as_trajectory()
        spacing = (norm_i.metric_length() / max(1, len(norm_i) - 1) + norm_j.metric_length() / max(1, len(norm_j) - 1)) / 2.0
        points = max(1, int(round(args.length / spacing)))
        result = motif_mod.motif_exact(norm_i, norm_j, min(points, len(norm_i), len(norm_j)))
    writer = csv.writer(sys.stdout)
    writer.writerow(["i_start", "i_end", "j_start", "j_end", "distance", "method"])
    writer.writerow([*result.range_i, *result.range_j, f"{result.distance:.6f}", result.method])
    return 0


def _cmd_shard_stats(args, parser) -> int:
    try:
        cfg = shard_mod.ShardConfig(num_shards=args.shards, num_nodes=args.nodes, prefix_bits=args.shard_prefix_bits)
    except ValueError as exc:
        parser.error(str(exc))
    index = GeodabIndex.load(args.index)
    report = shard_mod.distribution_report(index, cfg)
    writer = csv.writer(sys.stdout)
    writer.writerow(["level", "key", "count"])
    for level, counts in (("cell", report.cell_counts), ("shard", report.shard_counts), ("node", report.node_counts)):
        for key in sorted(counts):
            writer.writerow([level, key, counts[key]])
    writer.writerow(["summary", "imbalance", f"{report.imbalance:.4f}"])
    return 0


def _cmd_eval(args, parser) -> int:
    import pathlib

    cfg = _run_config(args, parser)
    trajectories = read_trajectories(args.input)
    queries = read_trajectories(args.queries)
    truth = read_truth(args.truth)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    depths = args.depths or [cfg.depth]
    curves = evaluate.normalization_sweep(
        trajectories, queries, truth, depths, cfg.kgram_size, cfg.guarantee_threshold, cfg.prefix_bits
    )
    with open(out / "pr.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth", "recall", "precision"])
        for depth in depths:
            for point in curves[depth]:
                writer.writerow([depth, f"{point.x:.6f}", f"{point.y:.6f}"])

    index = cfg.index().fit(trajectories)
    points, auc = evaluate.roc_auc(evaluate.corpus_scores(index, queries), truth)
    with open(out / "roc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for point in points:
            writer.writerow([f"{point.x:.6f}", f"{point.y:.6f}"])
    (out / "auc.txt").write_text(f"{auc:.6f}\n")

    fractions = args.bench_fractions or [100]
    rows = []
    for percent in fractions:
        if not 1 <= percent <= 100:
            parser.error("--bench-fractions entries must be in [1, 100]")
        keep = max(1, len(trajectories) * percent // 100)
        subset = trajectories[:keep]
        variants = {
            "geodab": cfg.index().fit(subset),
            "geohash": evaluate.GeohashCellIndex(cfg.depth).fit(subset),
        }
        rows.extend(evaluate.query_bench(variants, queries, density=percent / 100.0))
    with open(out / "bench.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "density", "mean_ms", "p95_ms"])
        for row in rows:
            writer.writerow([row.index_label, row.density, f"{row.mean_ms:.3f}", f"{row.p95_ms:.3f}"])
    print(f"wrote pr.csv, roc.csv, auc.txt, bench.csv to {out}", file=sys.stderr)
    return 0


def _cmd_bench(args, parser) -> int:
    methods = [m for m in args.methods.split(",") if m]
    for m in methods:
        if m not in ("dtw", "dfd", "jaccard"):
            parser.error(f"unknown method {m!r}")
    writer = csv.writer(sys.stdout)
    writer.writerow(["method", "t", "c", "millis"])
    for method in methods:
        for t in args.lengths:
            for c in args.candidates:
                record = baseline.bench_distance(method, t, c, seed=args.seed, repeats=args.repeats)
                writer.writerow([record.method, record.traj_len, record.candidates, f"{record.millis:.3f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
