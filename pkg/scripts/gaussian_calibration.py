"""Stationary KS of every sampler on N(0,1) with noisy gradients (B=1).

    python scripts/gaussian_calibration.py --seed 0 --out results/calibration.csv
"""

import argparse
from pathlib import Path

from sgmgt import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", type=float, default=1.0, help="gradient noise level B")
    ap.add_argument("--out", default="results/calibration.csv")
    args = ap.parse_args()
    rows = bench.run_gaussian(seed=args.seed, B=args.noise)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    bench.write_table(rows, args.out)
    for r in rows:
        print(f"{r['sampler']:14s} h={r['h']:<5g} KS={r['ks']:.4f}  ESS={r['ess']:.0f}")


if __name__ == "__main__":
    main()
