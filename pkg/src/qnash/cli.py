"""``qnash`` command line: solve, bench, gen and plotdata."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bench
from .instances import FAMILIES, InstanceSpec, generate
from .lifted import Exhausted, find_unique_nash
from .minimax import NotUnique, brute_force_unique_nash, certify_psne
from .oracle import (
    MODES,
    MatrixInstance,
    OracleHandle,
    default_mode,
    format_scalar,
    from_one_based,
    read_matrix,
    to_one_based,
    write_matrix,
)
from .psne import find_psne
from .swordfish import EmptyCandidates, swordfish

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_NOT_UNIQUE = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return values


def _probability(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnash", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a matrix file")
    p.add_argument("--matrix", required=True, type=Path)
    p.add_argument("--algo", required=True, choices=bench.ALGORITHMS)
    p.add_argument("--delta", type=_probability, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--support-size", type=int, default=None, help="known support size (nash)")

    p = sub.add_parser("bench", help="run a seeded batch of trials")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", required=True, type=_int_list)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", required=True, type=int)
    p.add_argument("--delta", required=True, type=_probability)
    p.add_argument("--seed0", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--algo", choices=bench.ALGORITHMS, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--delta-gap", type=Fraction, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-stability)")

    p = sub.add_parser("gen", help="write a generated instance and its ground truth")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--delta-gap", type=Fraction, default=None)
    p.add_argument("--row", type=int, default=None, help="1-based planted row")
    p.add_argument("--col", type=int, default=None, help="1-based planted column")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--mode", choices=MODES, default=None)

    p = sub.add_parser("plotdata", help="turn a bench CSV into plot-ready series")
    p.add_argument("--in", dest="in_csv", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--delta", type=_probability, default=0.1)
    return parser


def _pair(i: int, j: int) -> str:
    return f"({to_one_based(i)},{to_one_based(j)})"


def cmd_solve(args, out) -> int:
    mode = args.mode or default_mode()
    matrix = read_matrix(args.matrix, mode)
    oracle = OracleHandle(matrix)
    square = matrix.n_rows == matrix.n_cols
    if args.algo in ("swordfish", "nash") and not square:
        raise UsageError(f"{args.algo} needs a square matrix, got {matrix.n_rows}x{matrix.n_cols}")

    if args.algo in ("psne", "swordfish"):
        try:
            if args.algo == "psne":
                i, j = find_psne(oracle, args.delta, args.seed)
            else:
                i, j = swordfish(oracle)
        except EmptyCandidates as exc:
            print(f"no unique PSNE certified: {exc}", file=sys.stderr)
            return EXIT_NOT_UNIQUE
        search_queries = oracle.distinct_query_count()
        if not certify_psne(oracle, i, j):
            print(f"no unique PSNE certified: candidate {_pair(i, j)} is not a strict saddle point",
                  file=sys.stderr)
            return EXIT_VERIFY
        print(_pair(i, j), file=out)
        print(json.dumps({"row": to_one_based(i), "col": to_one_based(j),
                          "value": format_scalar(matrix.value(i, j)), "verified": True}), file=out)
        print(f"queries: {search_queries} (search), {oracle.distinct_query_count()} (with certification)",
              file=out)
        return EXIT_OK

    if args.algo == "nash":
        try:
            cert = find_unique_nash(oracle, args.delta, args.seed, support_size=args.support_size)
        except Exhausted as exc:
            print(f"no verified equilibrium: {exc}", file=sys.stderr)
            return EXIT_VERIFY
    else:
        full = oracle.query_block(range(matrix.n_rows), range(matrix.n_cols))
        try:
            cert = brute_force_unique_nash(MatrixInstance(full, matrix.mode), audit=True)
        except NotUnique as exc:
            print(f"not unique: {exc}", file=sys.stderr)
            return EXIT_NOT_UNIQUE
        cert.queries_used = oracle.distinct_query_count()
    print(cert.to_json(), file=out)
    print(f"queries: {oracle.distinct_query_count()}", file=out)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    mode = args.mode or default_mode()
    algo = args.algo or bench.default_algo(args.family)
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    report = bench.run_batch(
        args.family, args.n, args.k, args.delta, args.trials, args.seed0, algo,
        mode=mode, gap=args.delta_gap, workers=args.workers, timing=args.timing,
    )
    args.out.write_text(report.to_csv(timing=args.timing))
    for row in report.summary():
        print(
            f"{row['family']} {row['algo']} n={row['n']} k={row['k']}: "
            f"success {row['success_rate']:.3f} "
            f"[{row['wilson_low']:.3f}, {row['wilson_high']:.3f}], "
            f"queries median {row['median_queries']} p95 {row['p95_queries']:.1f} "
            f"max {row['max_queries']} bound {row['bound']:.1f} "
            f"violations {row['bound_violations']}",
            file=out,
        )
    return EXIT_OK


def cmd_gen(args, out) -> int:
    mode = args.mode or default_mode()
    row = from_one_based(args.row) if args.row is not None else None
    col = from_one_based(args.col) if args.col is not None else None
    spec = InstanceSpec(args.family, args.n, k=args.k, row=row, col=col,
                        gap=args.delta_gap, seed=args.seed, mode=mode)
    matrix, truth = generate(spec)
    write_matrix(args.out, matrix)
    doc = {
        "family": args.family,
        "n": args.n,
        "k": args.k,
        "seed": args.seed,
        "mode": mode,
        "support_size": truth.support_size,
        "equilibrium": truth.equilibrium.to_dict() if truth.equilibrium else None,
    }
    truth_path = args.out.with_name(args.out.name + ".truth.json")
    truth_path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {args.out} and {truth_path}", file=out)
    return EXIT_OK


def cmd_plotdata(args, out) -> int:
    bench.write_plot_series(args.in_csv, args.out, args.delta)
    print(f"wrote {args.out}", file=out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen, "plotdata": cmd_plotdata}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, bench.SchemaError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
