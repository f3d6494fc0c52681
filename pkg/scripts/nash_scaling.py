"""Distinct base queries of the known-support exact solver as n grows.

Prints the median of queries / n^2 per n; the ratio stays at 1 until the
probe sets stop covering every base row, which happens only well past n = 64.
"""
import argparse
import statistics
from pathlib import Path

from qnash import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="16,32,64")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--seed0", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/nash.csv"))
    args = ap.parse_args()

    sizes = [int(v) for v in args.n.split(",")]
    report = bench.run_batch(
        "planted_support", sizes, args.k, args.delta, args.trials, args.seed0, "nash",
        mode="float", workers=args.workers,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report.to_csv())
    args.out.with_suffix(".tsv").write_text(bench.plot_series(report.to_csv(), args.delta))
    for n in sizes:
        q = [r.queries for r in report.records if r.n == n]
        med = statistics.median(q)
        print(f"n={n:4d}  success={sum(r.success for r in report.records if r.n == n)}/{len(q)}  "
              f"median={med:.0f}  median/n^2={med / n**2:.4f}")


if __name__ == "__main__":
    main()
