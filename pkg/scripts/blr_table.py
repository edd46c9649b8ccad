"""Bayesian logistic regression comparison on the bundled Pima and heart data.

Protocol: minibatch 16, 5000 iterations, 1000 burn-in, 80/20 split with
split seed 0. Prints AUROC and median ESS per sampler.

    python scripts/blr_table.py --seeds 0 1 2 --out results/blr.csv
"""

import argparse
from pathlib import Path

import numpy as np

from sgmgt import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--split-seed", type=int, default=0)
    ap.add_argument("--out", default="results/blr.csv")
    args = ap.parse_args()

    rows = []
    for s in args.seeds:
        rows += bench.run_blr(seed=s, split_seed=args.split_seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    bench.write_table(rows, args.out)

    print(f"{'dataset':8s} {'sampler':14s} {'AUROC':>14s} {'median ESS':>16s}")
    for name in ("pima", "heart"):
        for label in dict.fromkeys(r["sampler"] for r in rows):
            sel = [r for r in rows if r["target"] == name and r["sampler"] == label]
            au = np.array([r["auroc"] for r in sel])
            ess = np.array([r["ess"] for r in sel])
            print(f"{name:8s} {label:14s} {au.mean():8.4f}±{au.std():.3f} {ess.mean():10.0f}±{ess.std():.0f}")


if __name__ == "__main__":
    main()
