"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data or format error, 4 the error
bound was violated (``verify`` only).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .analysis import OCCUPANCY_COLUMNS, loglog_slope, occupancy_sweep
from .balltree import SPLIT_RULES, build_tree, dump_tree
from .datagen import MAGNITUDE_KINDS, make_operands
from .io import read_matrix, write_matrix
from .matrix import (
    DimensionError,
    MatrixFormatError,
    col_magnitudes,
    naive_multiply,
    normalize_rows,
    row_magnitudes,
)
from .pipeline import RULE_MODES, dual_tree_matmul, verify_error_bound

EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 2, 3, 4

BENCH_COLUMNS = [
    "D", "M", "N", "epsilon", "tau", "regime", "rule_mode", "split", "leaf_size", "seed",
    "prune_count", "leaf_pair_count", "scalar_dot_products", "node_pairs_visited",
    "pruned_entries", "dual_ops", "naive_ops",
]
TIMING_COLUMNS = ["D", "M", "N", "seed", "build_seconds", "traversal_seconds", "naive_seconds"]

BENCH_HELP = f"""\
bench CSV columns: {", ".join(BENCH_COLUMNS)}.
dual_ops = scalar_dot_products * D; naive_ops = M * N * D.
Wall-clock times go to the separate --timings file ({", ".join(TIMING_COLUMNS)})
so the data CSV is byte-identical across runs with the same seed.
"""

ANALYZE_HELP = f"analyze CSV columns: {', '.join(OCCUPANCY_COLUMNS)}."


class DataError(Exception):
    pass


def _epsilon(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < math.sqrt(2.0):
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, sqrt(2)), got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def parse_dims(text) -> list[int]:
    """``"64,128,256"`` or an inclusive range ``"2:200"`` / ``"2:200:2"``."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text)
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _common(parser: argparse.ArgumentParser, epsilon: float = 0.1) -> None:
    parser.add_argument("--config", help="JSON file of option defaults; flags win")
    parser.add_argument("--epsilon", type=_epsilon, default=epsilon)
    parser.add_argument("--leaf-size", type=_positive_int, default=1)
    parser.add_argument("--rule-mode", choices=RULE_MODES, default="step9")
    parser.add_argument("--split", choices=SPLIT_RULES, default="median",
                        help="node split point on the widest coordinate")
    parser.add_argument("--threads", type=_positive_int, default=1,
                        help="traversal worker threads (1 = sequential)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("auto", "csv", "bin"), default="auto",
                        help="matrix file format (auto: .bin/.dat are binary)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="dualtree-matmul",
        description="Dual-tree approximate matrix multiplication with per-entry error bounds.",
        epilog=BENCH_HELP + ANALYZE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("multiply", help="approximate A @ B")
    _common(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True, help="output matrix path")
    p.add_argument("--stats", help="stats JSON path (default: <out>.stats.json)")
    p.add_argument("--timings", help="optional JSON path for wall-clock timings")
    subs["multiply"] = p

    p = sub.add_parser("verify", help="check the per-entry error bound against the naive product")
    _common(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--c-hat", help="approximate product to check (default: compute it)")
    p.add_argument("--report", help="optional JSON path for the error report")
    subs["verify"] = p

    p = sub.add_parser("gen", help="generate uniform or clustered operands")
    _common(p, epsilon=0.2)
    p.add_argument("--regime", choices=("uniform", "clustered"), default="clustered")
    p.add_argument("--rows", type=_positive_int, required=True, help="M")
    p.add_argument("--cols", type=_positive_int, required=True, help="N")
    p.add_argument("--dim", type=_positive_int, required=True, help="D")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--radius-fraction", type=float, default=0.25,
                   help="cluster radius as a fraction of asin(epsilon/sqrt 2)")
    p.add_argument("--magnitudes", choices=MAGNITUDE_KINDS, default="unit")
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>_A.<ext>, <prefix>_B.<ext>, <prefix>_meta.json")
    subs["gen"] = p

    p = sub.add_parser("bench", help="operation counts over a sweep of D",
                       epilog=BENCH_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, epsilon=0.2)
    p.add_argument("--regime", choices=("uniform", "clustered"), default="clustered")
    p.add_argument("--dims", default="64,128,256")
    p.add_argument("--size", type=_positive_int, help="M = N (default: D)")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--radius-fraction", type=float, default=0.25)
    p.add_argument("--magnitudes", choices=MAGNITUDE_KINDS, default="unit")
    p.add_argument("--repeats", type=_positive_int, default=1,
                   help="seeds seed, seed+1, ... per configuration")
    p.add_argument("--naive", action="store_true", help="also time the naive product")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--timings", help="optional CSV path for wall-clock timings")
    subs["bench"] = p

    p = sub.add_parser("analyze", help="expected cap occupancy under uniformity",
                       epilog=ANALYZE_HELP)
    _common(p)
    p.add_argument("--dims", default="2:64")
    p.add_argument("-M", "--rows", type=_positive_int, default=10)
    p.add_argument("-N", "--cols", type=_positive_int, default=10)
    p.add_argument("--out", help="CSV path (default: stdout only)")
    p.add_argument("--tree", help="matrix whose rows are dumped as a ball tree")
    p.add_argument("--tree-out", help="tree dump path (default: stdout)")
    subs["analyze"] = p
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            sp.error(f"unknown config keys: {', '.join(unknown)}")
        # re-validate config values through the same converters as flags
        for action in sp._actions:
            if action.dest in cfg and action.type is not None:
                try:
                    cfg[action.dest] = action.type(str(cfg[action.dest]))
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    sp.error(f"config {action.dest}: {exc}")
            if action.dest in cfg and action.choices and cfg[action.dest] not in action.choices:
                sp.error(f"config {action.dest}: {cfg[action.dest]!r} not in {list(action.choices)}")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def _table(header, rows, out=sys.stdout) -> None:
    cells = [[str(h) for h in header]] + [
        [f"{x:.6g}" if isinstance(x, float) else str(x) for x in row] for row in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def _load(path, fmt):
    try:
        return read_matrix(path, fmt)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None


def _run_config(args) -> dict:
    return {"epsilon": args.epsilon, "leaf_size": args.leaf_size,
            "rule_mode": args.rule_mode, "split": args.split}


def cmd_multiply(args) -> int:
    a, b = _load(args.a, args.format), _load(args.b, args.format)
    res = dual_tree_matmul(a, b, args.epsilon, args.leaf_size, args.rule_mode,
                           split=args.split, threads=args.threads)
    write_matrix(args.out, res.c_hat, args.format)
    stats = {"config": _run_config(args), "shape": list(res.c_hat.shape),
             "stats": res.stats.to_dict()}
    _write_json(args.stats or f"{args.out}.stats.json", stats)
    timings = {"build_seconds": res.build_seconds, "traversal_seconds": res.traversal_seconds}
    if args.timings:
        _write_json(args.timings, timings)
    rows = list(res.stats.to_dict().items()) + list(timings.items())
    _table(["quantity", "value"], rows)
    return 0


def cmd_verify(args) -> int:
    a, b = _load(args.a, args.format), _load(args.b, args.format)
    c = naive_multiply(a, b)
    if args.c_hat:
        c_hat = _load(args.c_hat, args.format)
    else:
        c_hat = dual_tree_matmul(a, b, args.epsilon, args.leaf_size, args.rule_mode,
                                 split=args.split, threads=args.threads).c_hat
    report = verify_error_bound(c, c_hat, row_magnitudes(a), col_magnitudes(b), args.epsilon)
    if args.report:
        _write_json(args.report, {"config": _run_config(args), "report": report.to_dict()})
    _table(["quantity", "value"], list(report.to_dict().items()))
    if not report.ok:
        print(f"error bound violated in {report.violations} entries", file=sys.stderr)
        return EXIT_VERIFY
    return 0


def cmd_gen(args) -> int:
    a, b, meta = make_operands(args.regime, args.rows, args.cols, args.dim, args.seed,
                               tau=args.tau, epsilon=args.epsilon,
                               radius_fraction=args.radius_fraction,
                               magnitudes=args.magnitudes)
    ext = "bin" if args.format == "bin" else "csv"
    write_matrix(f"{args.out_prefix}_A.{ext}", a, ext)
    write_matrix(f"{args.out_prefix}_B.{ext}", b, ext)
    _write_json(f"{args.out_prefix}_meta.json", meta)
    _table(["matrix", "rows", "cols"], [["A", *a.shape], ["B", *b.shape]])
    return 0


def cmd_bench(args) -> int:
    rows, timing_rows = [], []
    for dim in parse_dims(args.dims):
        size = args.size or dim
        for rep in range(args.repeats):
            seed = args.seed + rep
            a, b, _ = make_operands(args.regime, size, size, dim, seed, tau=args.tau,
                                    epsilon=args.epsilon,
                                    radius_fraction=args.radius_fraction,
                                    magnitudes=args.magnitudes)
            m, n = a.shape[0], b.shape[1]
            res = dual_tree_matmul(a, b, args.epsilon, args.leaf_size, args.rule_mode,
                                   split=args.split, threads=args.threads)
            naive_s = math.nan
            if args.naive:
                t = time.perf_counter()
                naive_multiply(a, b)
                naive_s = time.perf_counter() - t
            s = res.stats
            rows.append([dim, m, n, args.epsilon, args.tau, args.regime, args.rule_mode,
                         args.split, args.leaf_size, seed, s.prune_count, s.leaf_pair_count,
                         s.scalar_dot_products, s.node_pairs_visited, s.pruned_entries,
                         s.scalar_dot_products * dim, m * n * dim])
            timing_rows.append([dim, m, n, seed, res.build_seconds,
                                res.traversal_seconds, naive_s])
    _write_csv(args.out, BENCH_COLUMNS, rows)
    if args.timings:
        _write_csv(args.timings, TIMING_COLUMNS, timing_rows)
    shown = ["D", "M", "N", "prune_count", "leaf_pair_count", "scalar_dot_products",
             "dual_ops", "naive_ops"]
    idx = [BENCH_COLUMNS.index(c) for c in shown]
    _table(shown + ["traversal_s"],
           [[r[i] for i in idx] + [t[5]] for r, t in zip(rows, timing_rows)])
    dims = sorted({r[0] for r in rows})
    if len(dims) > 1:
        by_dim = {d: np.mean([r[15] for r in rows if r[0] == d]) for d in dims}
        slope = loglog_slope(dims, [by_dim[d] for d in dims])
        print(f"log-log slope of dual_ops vs D: {slope:.3f}")
    return 0


def cmd_analyze(args) -> int:
    preds = occupancy_sweep(args.rows, args.cols, parse_dims(args.dims), args.epsilon)
    rows = [p.row() for p in preds]
    if args.out:
        _write_csv(args.out, OCCUPANCY_COLUMNS, rows)
    _table(OCCUPANCY_COLUMNS, rows)
    if args.tree:
        tree = build_tree(normalize_rows(_load(args.tree, args.format)),
                          args.leaf_size, args.split)
        text = dump_tree(tree)
        if args.tree_out:
            with open(args.tree_out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 0


COMMANDS = {
    "multiply": cmd_multiply,
    "verify": cmd_verify,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DataError, MatrixFormatError, DimensionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
