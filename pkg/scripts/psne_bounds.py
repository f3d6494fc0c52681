"""FindPSNE success rate and distinct queries against 8 n log2(4 n^2 / delta)."""
import argparse
from fractions import Fraction
from pathlib import Path

from qnash import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="planted_psne", choices=["planted_psne", "gap"])
    ap.add_argument("--n", default="16,32,64,128,256")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--gap", type=Fraction, default=None)
    ap.add_argument("--seed0", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/psne.csv"))
    args = ap.parse_args()

    sizes = [int(v) for v in args.n.split(",")]
    mode = "exact" if args.family == "gap" else "float"
    report = bench.run_batch(
        args.family, sizes, 1, args.delta, args.trials, args.seed0, "psne",
        mode=mode, gap=args.gap, workers=args.workers,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report.to_csv())
    args.out.with_suffix(".tsv").write_text(bench.plot_series(report.to_csv(), args.delta))
    for row in report.summary():
        print(f"n={row['n']:4d}  success={row['success_rate']:.3f} "
              f"[{row['wilson_low']:.3f}, {row['wilson_high']:.3f}]  "
              f"median={row['median_queries']:.0f}  max={row['max_queries']}  bound={row['bound']:.0f}")


if __name__ == "__main__":
    main()
