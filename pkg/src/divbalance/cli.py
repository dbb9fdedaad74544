"""Command-line entry point.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from divbalance import io
from divbalance.datagen import BlobsConfig, CirclesConfig, generate_biased_circles, generate_imbalanced_blobs
from divbalance.embedder import TrainConfig, encode, init_embedder, train_autoencoder
from divbalance.errors import ConfigError, GenerationError, ShapeError, TrainingError
from divbalance.evaluation import (
    class_size_std,
    crossover_ratio,
    evaluate_subset,
    make_split,
)
from divbalance.pipeline import (
    SUMMARY_HEADER,
    EmbedderSpec,
    IterationReport,
    PipelineConfig,
    run_pipeline,
    summary_rows,
)
from divbalance.selection import (
    ClusterSelectConfig,
    SelectionResult,
    cluster_balanced_select,
    diverse_select,
    random_select,
)


class UsageError(Exception):
    pass


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})")


def _build(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(where, f"unknown keys {unknown}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(where, str(exc))


def _read_dataset(path):
    try:
        return io.read_dataset(path)
    except FileNotFoundError:
        raise UsageError(f"dataset not found: {path}")


def _num_classes(*datasets) -> int:
    return max(d.num_classes for d in datasets)


def cmd_gen(args, kind: str) -> int:
    raw = _load_json(args.config)
    if kind == "circles":
        config = _build(CirclesConfig, raw, "circles config")
        dataset = generate_biased_circles(config)
    else:
        config = _build(BlobsConfig, raw, "blobs config")
        dataset = generate_imbalanced_blobs(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_dataset(dataset, out)
    io.write_metadata(out, f"{kind}", config)
    counts = np.bincount(dataset.label_array())
    print(f"points: {len(dataset)}")
    print("class counts: " + " ".join(str(int(c)) for c in counts))
    return 0


def cmd_embed(args) -> int:
    dataset = _read_dataset(args.dataset)
    raw = _load_json(args.config)
    spec = raw.get("embedder", {})
    train = _build(TrainConfig, raw.get("train", {}), "train")
    dims = spec.get("layer_dims")
    if not dims:
        raise ConfigError("embedder.layer_dims", "required")
    if dims[0] != dataset.dim:
        raise ConfigError("embedder.layer_dims", f"first layer {dims[0]} != data dimension {dataset.dim}")
    params = init_embedder(dims, spec.get("activation", "tanh"), train.seed, train.weight_init_scale)
    params, trace = train_autoencoder(params, dataset.features, train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_params(params, out / "params.json")
    io.write_embeddings(dataset.ids, encode(params, dataset.features), out / "embeddings.csv")
    io.write_csv(["epoch", "loss"], [[e, repr(v)] for e, v in enumerate(trace)], out / "loss.csv")
    if trace:
        print(f"epochs: {len(trace)}  first loss: {trace[0]:.6g}  final loss: {trace[-1]:.6g}")
    return 0


def cmd_select(args) -> int:
    dataset = _read_dataset(args.dataset)
    if args.n < 1 or args.n > len(dataset):
        raise UsageError(f"--n must be in [1, {len(dataset)}], got {args.n}")
    if args.embeddings:
        try:
            ids, embeddings = io.read_embeddings(args.embeddings)
        except FileNotFoundError:
            raise UsageError(f"embeddings not found: {args.embeddings}")
        if ids != dataset.ids:
            raise UsageError("embedding ids do not match dataset ids")
    else:
        embeddings = dataset.features

    shortfall = {}
    if args.strategy == "diverse":
        result = diverse_select(embeddings, args.n, args.seed)
    elif args.strategy == "random":
        result = SelectionResult(random_select(len(dataset), args.n, args.seed), [], args.seed)
    else:
        if args.n % args.clusters:
            raise UsageError("--n must be a multiple of --clusters for cluster_balanced")
        cfg = ClusterSelectConfig(args.clusters, args.n // args.clusters, args.max_iters, 1e-6, args.seed)
        picked = cluster_balanced_select(embeddings, cfg)
        result = SelectionResult(picked.indices, [], args.seed)
        shortfall = picked.shortfall

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_selection(result, out / "selection.json")
    subset = dataset.subset(result.indices)
    io.write_dataset(subset, out / "subset.csv")
    print(f"selected: {len(result.indices)}")
    if shortfall:
        print("shortfall: " + " ".join(f"{c}:{v}" for c, v in sorted(shortfall.items())))
    if subset.has_labels and dataset.has_labels:
        print(f"class_size_std: {class_size_std(subset.labels, dataset.num_classes):.6f}")
    return 0


def _pipeline_configs(raw: dict):
    raw = dict(raw)
    strategies = raw.pop("strategies", None) or [raw.pop("strategy", "diverse")]
    raw.pop("strategy", None)
    seeds = raw.pop("seeds", None) or [raw.pop("seed", 0)]
    raw.pop("seed", None)
    cluster = raw.pop("cluster", None)
    embedder = raw.pop("embedder", None) or {}
    train = raw.pop("train", None) or {}
    base = dict(
        cluster=_build(ClusterSelectConfig, cluster, "cluster") if cluster else None,
        embedder=_build(EmbedderSpec, embedder, "embedder"),
        train=_build(TrainConfig, train, "train"),
    )
    for strategy in strategies:
        for seed in seeds:
            yield strategy, seed, _build(PipelineConfig, {**raw, **base, "strategy": strategy, "seed": seed}, "pipeline")


def cmd_iterate(args) -> int:
    dataset = _read_dataset(args.dataset)
    test = _read_dataset(args.test)
    if dataset.dim != test.dim:
        raise UsageError(f"feature dimensions differ: dataset {dataset.dim}, test {test.dim}")
    raw = _load_json(args.config)
    records, rows = [], []
    print(f"{'strategy':<17}{'seed':>6}{'iter':>6}{'accuracy':>10}{'class_std':>11}")
    for strategy, seed, config in _pipeline_configs(raw):
        reports = run_pipeline(dataset, test, config)
        for r in reports:
            records.append({"strategy": strategy, "seed": seed, **r.to_record(args.timing)})
            print(f"{strategy:<17}{seed:>6}{r.iteration:>6}{r.train_accuracy_on_test:>10.4f}{r.class_size_std:>11.3f}")
        rows.extend(summary_rows(strategy, seed, reports))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_jsonl(records, out / "reports.jsonl")
    io.write_csv(SUMMARY_HEADER, rows, out / "summary.csv")
    return 0


def summary_from_jsonl(path) -> list:
    """Rebuild summary rows from a reports JSONL file."""
    rows = []
    for rec in io.read_jsonl(path):
        rows.extend(summary_rows(rec["strategy"], rec["seed"], [IterationReport.from_record(rec)]))
    return rows


def cmd_evaluate(args) -> int:
    train = _read_dataset(args.train_subset)
    test = _read_dataset(args.test)
    if train.dim != test.dim:
        raise UsageError(f"feature dimensions differ: train {train.dim}, test {test.dim}")
    if not train.has_labels or not test.has_labels:
        raise UsageError("evaluate needs labeled train and test files")
    acc = evaluate_subset(train, range(len(train)), test, args.k)
    std = class_size_std(train.labels, _num_classes(train, test))
    print(f"accuracy: {acc:.6f}")
    print(f"class_size_std: {std:.6f}")
    if args.out:
        io.write_csv(
            ["accuracy", "class_size_std", "k", "n_train", "n_test"],
            [[repr(acc), repr(std), args.k, len(train), len(test)]],
            args.out,
        )
    return 0


def cmd_crossover(args) -> int:
    dataset = _read_dataset(args.dataset)
    split = make_split(dataset, args.test_fraction, args.balance_mode, args.split_seed)
    result = crossover_ratio(dataset, split, args.n_diverse, args.k, args.seed_count)
    ratio = "not reached" if result.ratio is None else f"{result.ratio:.2f}"
    print(f"diverse accuracy at {args.n_diverse}: {result.diverse_accuracy:.4f}")
    for size, acc in result.sweep:
        print(f"  random {size:>6}: {acc:.4f}")
    print(f"crossover ratio: {ratio}")
    if args.out:
        rows = [
            ["crossover", args.n_diverse, size, repr(result.diverse_accuracy), repr(acc),
             "" if result.ratio is None else repr(result.ratio)]
            for size, acc in result.sweep
        ]
        io.write_csv(
            ["strategy", "n_diverse", "n_random", "diverse_accuracy", "random_accuracy", "ratio"],
            rows, args.out, append=args.append,
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divbalance", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("gen-circles", "gen-blobs"):
        p = sub.add_parser(name, help=f"generate the {name[4:]} dataset")
        p.add_argument("config", help="JSON config file")
        p.add_argument("--out", required=True, help="output CSV; metadata goes next to it as .json")

    p = sub.add_parser("embed", help="train an autoencoder and write embeddings")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("select", help="select a subset of a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", help="embedding CSV; defaults to the raw features")
    p.add_argument("--strategy", choices=("diverse", "random", "cluster_balanced"), default="diverse")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=10, help="k for cluster_balanced")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("iterate", help="run the iterative selection pipeline")
    p.add_argument("--dataset", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--timing", action="store_true", help="record wall_time (makes output non-reproducible)")

    p = sub.add_parser("evaluate", help="score a k-NN trained on a subset")
    p.add_argument("--train-subset", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", help="CSV file for the metrics row")

    p = sub.add_parser("crossover", help="random data needed to match diverse selection")
    p.add_argument("--dataset", required=True)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--balance-mode", choices=("as_is", "class_balanced"), default="class_balanced")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--n-diverse", type=int, default=500)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed-count", type=int, default=10)
    p.add_argument("--out", help="CSV file for the sweep rows")
    p.add_argument("--append", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "gen-circles": lambda a: cmd_gen(a, "circles"),
        "gen-blobs": lambda a: cmd_gen(a, "blobs"),
        "embed": cmd_embed,
        "select": cmd_select,
        "iterate": cmd_iterate,
        "evaluate": cmd_evaluate,
        "crossover": cmd_crossover,
    }
    try:
        return handlers[args.command](args)
    except (UsageError, ConfigError, ShapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, TrainingError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
