"""Desk-scale versions of the circles and iterative-blobs comparisons.

Shared by ``scripts/`` and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from divbalance.datagen import (
    BlobsConfig,
    CirclesConfig,
    LabeledDataset,
    blob_centers,
    generate_biased_circles,
    generate_imbalanced_blobs,
)
from divbalance.embedder import TrainConfig
from divbalance.evaluation import class_size_std, evaluate_subset, make_split
from divbalance.pipeline import EmbedderSpec, PipelineConfig, run_pipeline
from divbalance.selection import diverse_select, random_select


@dataclass
class SizeComparison:
    """Per-seed accuracy and class-size std for each (strategy, n)."""

    sizes: List[int]
    accuracy: Dict[str, np.ndarray] = field(default_factory=dict)  # strategy -> (seeds, sizes)
    std: Dict[str, np.ndarray] = field(default_factory=dict)

    def mean_accuracy(self, strategy: str) -> np.ndarray:
        return self.accuracy[strategy].mean(axis=0)

    def mean_std(self, strategy: str) -> np.ndarray:
        return self.std[strategy].mean(axis=0)

    def gap(self) -> np.ndarray:
        return self.mean_accuracy("diverse") - self.mean_accuracy("random")


def compare_on_circles(
    sizes: Sequence[int],
    seeds: Sequence[int],
    k: int = 5,
    circles: CirclesConfig | None = None,
    test_fraction: float = 0.2,
) -> SizeComparison:
    """Diverse vs random training subsets of the circles data, scored by k-NN.

    For each seed the data is split with a class-balanced test side, then both
    selectors pick from the training side using raw coordinates.
    """
    dataset = generate_biased_circles(circles or CirclesConfig())
    num_classes = dataset.num_classes
    result = SizeComparison(list(sizes))
    acc = {s: np.zeros((len(seeds), len(sizes))) for s in ("diverse", "random")}
    std = {s: np.zeros((len(seeds), len(sizes))) for s in ("diverse", "random")}
    for i, seed in enumerate(seeds):
        split = make_split(dataset, test_fraction, "class_balanced", seed)
        pool = np.asarray(split.train_indices)
        test = dataset.subset(split.test_indices)
        for j, n in enumerate(sizes):
            picks = {
                "diverse": pool[diverse_select(dataset.features[pool], n, seed).indices],
                "random": pool[random_select(len(pool), n, seed)],
            }
            for strategy, rows in picks.items():
                acc[strategy][i, j] = evaluate_subset(dataset, rows, test, k)
                std[strategy][i, j] = class_size_std([dataset.labels[r] for r in rows], num_classes)
    result.accuracy, result.std = acc, std
    return result


def selection_balance(n: int, seeds: Sequence[int], circles: CirclesConfig | None = None) -> Dict[str, float]:
    """Mean class-size std of ``n`` diverse vs random picks from the whole circles set."""
    dataset = generate_biased_circles(circles or CirclesConfig())
    labels = dataset.label_array()
    out = {}
    for strategy in ("diverse", "random"):
        values = []
        for seed in seeds:
            if strategy == "diverse":
                rows = diverse_select(dataset.features, n, seed).indices
            else:
                rows = random_select(len(dataset), n, seed)
            values.append(class_size_std(labels[rows], dataset.num_classes))
        out[strategy] = float(np.mean(values))
    return out


def blobs_task(seed: int, class_counts=(400, 50, 50, 25), dim: int = 8, test_per_class: int = 50,
               separation: float = 4.0):
    """Imbalanced training blobs plus a balanced test set drawn around the same centers."""
    cfg = BlobsConfig(num_classes=len(class_counts), class_counts=list(class_counts), dim=dim,
                      cluster_std=1.0, center_separation=separation, seed=seed)
    centers = blob_centers(cfg)
    train = generate_imbalanced_blobs(cfg)
    test_cfg = BlobsConfig(num_classes=len(class_counts), class_counts=[test_per_class] * len(class_counts),
                           dim=dim, cluster_std=1.0, center_separation=separation, seed=seed + 1_000_000)
    return train, generate_imbalanced_blobs(test_cfg, centers=centers)


def iterate_on_blobs(
    strategies: Sequence[str],
    seeds: Sequence[int],
    iterations: int = 4,
    n_select: int = 100,
    layer_dims=(8, 16, 4, 16, 8),
    epochs: int = 30,
) -> Dict[str, Dict[str, np.ndarray]]:
    """Returns ``{strategy: {"accuracy": (seeds, iters), "std": (seeds, iters)}}``."""
    out = {}
    for strategy in strategies:
        acc = np.zeros((len(seeds), iterations))
        std = np.zeros((len(seeds), iterations))
        for i, seed in enumerate(seeds):
            train, test = blobs_task(seed, dim=layer_dims[0])
            config = PipelineConfig(
                iterations=iterations, n_select=n_select, strategy=strategy,
                embedder=EmbedderSpec(list(layer_dims)), train=TrainConfig(epochs=epochs), seed=seed,
            )
            for r in run_pipeline(train, test, config):
                acc[i, r.iteration] = r.train_accuracy_on_test
                std[i, r.iteration] = r.class_size_std
        out[strategy] = {"accuracy": acc, "std": std}
    return out


def nonincreasing_with_slack(values, slack: float = 0.02, allowed: int = 1) -> bool:
    """True if ``values`` never rises, except up to ``allowed`` rises of at most ``slack``."""
    rises = [b - a for a, b in zip(values, values[1:]) if b > a]
    return len(rises) <= allowed and all(r <= slack for r in rises)
