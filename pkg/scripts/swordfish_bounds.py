"""Swordfish distinct queries against 3n - 2 on planted saddle points."""
import argparse
from pathlib import Path

from qnash import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="2,4,8,16,32,64")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed0", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/swordfish.csv"))
    args = ap.parse_args()

    sizes = [int(v) for v in args.n.split(",")]
    report = bench.run_batch(
        "planted_psne", sizes, 1, 0.1, args.trials, args.seed0, "swordfish",
        mode="float", workers=args.workers,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report.to_csv())
    args.out.with_suffix(".tsv").write_text(bench.plot_series(report.to_csv()))
    for row in report.summary():
        print(f"n={row['n']:4d}  success={row['success_rate']:.3f}  "
              f"max={row['max_queries']:5d}  3n-2={row['bound']:5.0f}  violations={row['bound_violations']}")


if __name__ == "__main__":
    main()
