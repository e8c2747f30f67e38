#!/usr/bin/env python3
"""Mean correct exclusive-or classifications as random features are added.

Sweeps 0..10 added random binary features for a few neighborhood sizes so the
degradation curve (and the role of k) is visible in one table.
"""

import argparse
import time

from mbparse.xor import xor_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 3])
    args = ap.parse_args()

    print("extra", *(f"k={k}" for k in args.ks), sep="\t")
    for extra in range(11):
        t0 = time.time()
        row = [
            f"{xor_experiment(extra, runs=args.runs, seed=args.seed, k=k):7.2f}"
            for k in args.ks
        ]
        print(extra, *row, f"({time.time() - t0:.1f}s)", sep="\t")


if __name__ == "__main__":
    main()
