#!/usr/bin/env python
"""Iterative embed/select/retrain loop on the imbalanced blobs stand-in.

    python scripts/run_iterative.py --out results/iterative.csv
"""

import argparse
from pathlib import Path

from divbalance import io
from divbalance.experiments import iterate_on_blobs


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--strategies", nargs="+", default=["diverse", "random"])
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--iterations", type=int, default=4)
    parser.add_argument("--n-select", type=int, default=100)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--out", default="results/iterative.csv")
    args = parser.parse_args()

    seeds = list(range(args.seeds))
    res = iterate_on_blobs(args.strategies, seeds, args.iterations, args.n_select, epochs=args.epochs)
    rows = [
        [strategy, seed, t, repr(res[strategy]["accuracy"][i, t]), repr(res[strategy]["std"][i, t])]
        for strategy in args.strategies
        for i, seed in enumerate(seeds)
        for t in range(args.iterations)
    ]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_csv(["strategy", "seed", "iteration", "accuracy", "class_size_std"], rows, out)

    for strategy in args.strategies:
        acc = res[strategy]["accuracy"].mean(axis=0)
        std = res[strategy]["std"].mean(axis=0)
        print(f"{strategy:<17} acc " + " ".join(f"{a:.3f}" for a in acc) + "   std " + " ".join(f"{s:.2f}" for s in std))


if __name__ == "__main__":
    main()
