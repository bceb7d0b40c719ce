"""``encforge`` command line.

Exit codes:
  0  success
  1  unreadable or malformed trace / model input
  2  cluster file problems, or a generation config that does not fit the model
  3  generation produced nothing because no needed cluster pair had samples
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
from pathlib import Path

from . import __version__
from .analysis import StatModel, build_stat_model
from .errors import ClusterCountMismatch, ClusterError, EmptyDistribution, EncforgeError, ParseError
from .ingest import IngestStats, format_clusters, format_trace, read_clusters_file, read_trace_file
from .synthesis import (BOUNDARY_POLICIES, DEFAULT_BOUNDARY, config_for_total, enlarge_dataset,
                        synthetic_cluster_map)
from .trace_model import GenerationConfig
from .validation import DEFAULT_MAX_POINTS, DEFAULT_WINDOWS, DURATION, ICT, METRICS, cdf_table, compare_traces, extract_metric

log = logging.getLogger("encforge")

DEFAULT_SEED = 0x454E43464F524745  # b"ENCFORGE"
SEED_ENV = "ENCFORGE_SEED"

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_NOTHING = 0, 1, 2, 3

MODEL_FILE = "model.json"
TRACE_FILE = "synthetic_trace.txt"
CLUSTERS_FILE = "synthetic_clusters.txt"
DIAGNOSTICS_FILE = "diagnostics.json"
COMPARISON_FILE = "comparison.json"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _counts(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return counts


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def resolve_seed(args) -> int:
    if getattr(args, "entropy", False):
        seed = secrets.randbits(64)
        log.info("entropy seed %d", seed)
        return seed
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _u64(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise CliError(EXIT_CONFIG, f"{SEED_ENV}={env!r} is not an unsigned 64-bit integer") from None
    return DEFAULT_SEED


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_trace(path, skip_invalid=False):
    stats = IngestStats()
    try:
        trace = read_trace_file(path, skip_invalid=skip_invalid, stats=stats)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read trace {path}: {exc.strerror}") from None
    except EncforgeError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from None
    if stats.skipped:
        log.warning("%s: skipped %d invalid records (%d self-encounters, %d non-positive durations)",
                    path, stats.skipped, stats.self_encounters, stats.non_positive)
    return trace


def _load_clusters(path, trace=None):
    try:
        return read_clusters_file(path, trace)
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read cluster file {path}: {exc.strerror}") from None
    except (ClusterError, ParseError) as exc:
        raise CliError(EXIT_CONFIG, f"{path}: {exc}") from None


def _load_model(path) -> StatModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return StatModel.from_json(fh.read())
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read model {path}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: invalid model: {exc}") from None


def _generation_config(args, model: StatModel) -> GenerationConfig:
    max_time = args.max_time if args.max_time is not None else model.span_s
    if max_time is None or max_time <= 0:
        raise CliError(EXIT_CONFIG, f"max time must be positive (got {max_time})")
    seed = resolve_seed(args)
    try:
        if args.counts is not None:
            config = GenerationConfig(args.counts, max_time, seed)
        elif args.nodes is not None:
            if args.nodes <= 0:
                raise ValueError("node count must be positive")
            config = config_for_total(model, args.nodes, max_time, seed)
        else:
            config = GenerationConfig(model.cluster_sizes, max_time, seed)
        config.check_against(model.num_clusters)
    except ClusterCountMismatch as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"invalid generation config: {exc}") from None
    return config


def _run_analyze(args) -> dict:
    trace = _load_trace(args.trace, args.skip_invalid)
    clusters = _load_clusters(args.clusters, trace)
    model = build_stat_model(trace, clusters)
    out = Path(args.out) / MODEL_FILE
    _write(out, model.to_json())
    return {"model": str(out), "model_obj": model}


def _run_generate(args, model: StatModel) -> dict:
    config = _generation_config(args, model)
    try:
        gen = enlarge_dataset(model, config, threads=args.threads, boundary=args.boundary)
    except EmptyDistribution as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    out = Path(args.out)
    _write(out / TRACE_FILE, format_trace(gen.trace))
    _write(out / CLUSTERS_FILE, format_clusters(synthetic_cluster_map(gen.network, model)))
    _write(out / DIAGNOSTICS_FILE, gen.report.to_json())
    for exc in gen.report.insufficient:
        log.warning("%s", exc)
    log.info("generated %d encounters over %d nodes", len(gen.trace), gen.network.num_nodes)
    if not gen.report.generatable:
        raise CliError(EXIT_NOTHING, "no cluster pair could be generated; see diagnostics")
    return {"trace": str(out / TRACE_FILE), "clusters": str(out / CLUSTERS_FILE),
            "diagnostics": str(out / DIAGNOSTICS_FILE)}


def _windows(args) -> dict:
    return {DURATION: args.duration_window, ICT: args.ict_window}


def _run_validate(real_path, syn_path, args, real_clusters_path=None, syn_clusters_path=None) -> dict:
    real = _load_trace(real_path, args.skip_invalid)
    syn = _load_trace(syn_path)
    real_clusters = _load_clusters(real_clusters_path, real) if real_clusters_path else None
    syn_clusters = _load_clusters(syn_clusters_path, syn) if syn_clusters_path else None
    windows = _windows(args)
    if any(w <= 0 for w in windows.values()):
        raise CliError(EXIT_CONFIG, "windows must be positive")
    out = Path(args.out)
    files = {}
    for name, trace in (("real", real), ("synthetic", syn)):
        for metric in METRICS:
            values = extract_metric(trace, metric)
            path = out / f"{name}_{metric}_cdf.csv"
            if len(values):
                text = cdf_table(values, windows[metric], args.max_points, metric).to_csv()
            else:
                log.warning("%s trace has no %s values", name, metric)
                text = "x_seconds,cdf\n"
            _write(path, text)
            files[f"{name}_{metric}_cdf"] = str(path)
    report = compare_traces(real, syn, windows, real_clusters, syn_clusters)
    _write(out / COMPARISON_FILE, report.to_json())
    files["comparison"] = str(out / COMPARISON_FILE)
    for m, c in report.aggregate.items():
        log.info("%s: KS %s (real n=%d, synthetic n=%d)", m, c.ks_distance, c.real_count, c.synthetic_count)
    return files


def cmd_analyze(args) -> dict:
    result = _run_analyze(args)
    result.pop("model_obj")
    return result


def cmd_generate(args) -> dict:
    return _run_generate(args, _load_model(args.model))


def cmd_validate(args) -> dict:
    return _run_validate(args.real, args.synthetic, args, args.clusters, args.synthetic_clusters)


def cmd_roundtrip(args) -> dict:
    analyzed = _run_analyze(args)
    model = analyzed.pop("model_obj")
    generated = _run_generate(args, model)
    validated = _run_validate(args.trace, generated["trace"], args, args.clusters, generated["clusters"])
    return {**analyzed, **generated, **validated}


def _add_common(p, *, out_help):
    p.add_argument("--out", required=True, metavar="DIR", help=out_help)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_generation(p):
    size = p.add_mutually_exclusive_group()
    size.add_argument("--counts", type=_counts, metavar="A,B,C", help="nodes per cluster")
    size.add_argument("--nodes", type=int, metavar="N", help="total nodes, split by source cluster ratios")
    p.add_argument("--max-time", type=int, metavar="S", help="generation horizon in seconds (default: source span)")
    p.add_argument("--seed", type=_u64, metavar="U64", help=f"RNG seed (fallback: ${SEED_ENV}, then a fixed default)")
    p.add_argument("--entropy", action="store_true", help="seed from the OS entropy pool")
    p.add_argument("--threads", type=int, default=1, metavar="K")
    p.add_argument("--boundary", choices=BOUNDARY_POLICIES, default=DEFAULT_BOUNDARY,
                   help="what to do with an encounter running past --max-time")


def _add_windows(p):
    p.add_argument("--duration-window", type=int, default=DEFAULT_WINDOWS[DURATION], metavar="S")
    p.add_argument("--ict-window", type=int, default=DEFAULT_WINDOWS[ICT], metavar="S")
    p.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encforge", description="Cluster-aware encounter trace enlargement.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="learn a model from a trace and its cluster file")
    p.add_argument("--trace", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--skip-invalid", action="store_true")
    _add_common(p, out_help=f"directory for {MODEL_FILE}")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="generate a synthetic trace from a model")
    p.add_argument("--model", required=True)
    _add_generation(p)
    _add_common(p, out_help="directory for the trace, cluster file and diagnostics")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="compare CDFs of a real and a synthetic trace")
    p.add_argument("--real", "--trace", dest="real", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--clusters", help="cluster file of the real trace (enables per-pair comparison)")
    p.add_argument("--synthetic-clusters")
    p.add_argument("--skip-invalid", action="store_true")
    _add_windows(p)
    _add_common(p, out_help="directory for CDF tables and the comparison report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("roundtrip", help="analyze, generate and validate in one go")
    p.add_argument("--trace", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--skip-invalid", action="store_true")
    _add_generation(p)
    _add_windows(p)
    _add_common(p, out_help="directory for every output file")
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="encforge: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "threads", 1) < 1:
        print("encforge: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = args.func(args)
    except CliError as exc:
        print(f"encforge: error: {exc}", file=sys.stderr)
        return exc.code
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
