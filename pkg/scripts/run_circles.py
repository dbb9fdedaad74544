#!/usr/bin/env python
"""Random vs diverse training subsets on the biased circles data.

Writes per-seed rows to CSV and prints the mean accuracy / class-size std
table for each training-set size, plus the crossover ratio at the smallest size.

    python scripts/run_circles.py --out results/circles.csv
"""

import argparse
from pathlib import Path

import numpy as np

from divbalance import io
from divbalance.datagen import CirclesConfig, generate_biased_circles
from divbalance.evaluation import crossover_ratio, make_split
from divbalance.experiments import compare_on_circles, selection_balance


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000, 3000, 4000])
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--radial-noise", type=float, default=0.05)
    parser.add_argument("--no-crossover", action="store_true")
    parser.add_argument("--out", default="results/circles.csv")
    args = parser.parse_args()

    circles = CirclesConfig(radial_noise=args.radial_noise)
    seeds = range(args.seeds)
    res = compare_on_circles(args.sizes, seeds, args.k, circles)

    rows = []
    for strategy in ("random", "diverse"):
        for i, seed in enumerate(seeds):
            for j, n in enumerate(args.sizes):
                rows.append([strategy, seed, n, repr(res.accuracy[strategy][i, j]), repr(res.std[strategy][i, j])])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_csv(["strategy", "seed", "n", "accuracy", "class_size_std"], rows, out)

    print(f"{'n':>6} {'random acc':>16} {'diverse acc':>16} {'random std':>11} {'diverse std':>12}")
    for j, n in enumerate(args.sizes):
        r, d = res.accuracy["random"][:, j], res.accuracy["diverse"][:, j]
        print(f"{n:>6} {r.mean():>9.3f} ± {r.std():.3f} {d.mean():>9.3f} ± {d.std():.3f}"
              f" {res.std['random'][:, j].mean():>11.2f} {res.std['diverse'][:, j].mean():>12.2f}")

    bal = selection_balance(args.sizes[0], seeds, circles)
    print(f"class-size std of {args.sizes[0]} picks from the full set: "
          f"random {bal['random']:.2f}, diverse {bal['diverse']:.2f}")

    if not args.no_crossover:
        dataset = generate_biased_circles(circles)
        split = make_split(dataset, 0.2, "class_balanced", 0)
        cross = crossover_ratio(dataset, split, args.sizes[0], args.k, args.seeds)
        shown = "not reached" if cross.ratio is None else f"{cross.ratio:.2f}"
        print(f"crossover ratio at n={args.sizes[0]}: {shown}")


if __name__ == "__main__":
    main()
