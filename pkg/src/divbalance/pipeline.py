"""Iterative embed -> select -> retrain loop with per-iteration metrics."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from divbalance.datagen import LabeledDataset
from divbalance.embedder import TrainConfig, check_layer_dims, encode, init_embedder, train_autoencoder
from divbalance.errors import ConfigError
from divbalance.evaluation import class_size_std, evaluate_subset
from divbalance.selection import ClusterSelectConfig, cluster_balanced_select, diverse_select, random_select

STRATEGIES = ("diverse", "random", "cluster_balanced")


def derive_subseed(master_seed: int, iteration: int, purpose: str) -> int:
    """64-bit seed from hashing ``(master_seed, iteration, purpose)``."""
    payload = f"{int(master_seed)}:{int(iteration)}:{purpose}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass
class EmbedderSpec:
    """``layer_dims=None`` means the identity embedder (raw features)."""

    layer_dims: Optional[List[int]] = None
    activation: str = "tanh"

    @property
    def identity(self) -> bool:
        return self.layer_dims is None


@dataclass
class PipelineConfig:
    iterations: int = 4
    n_select: int = 100
    strategy: str = "diverse"
    cluster: Optional[ClusterSelectConfig] = None
    embedder: EmbedderSpec = field(default_factory=EmbedderSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    # "full_dataset" or an int n for a random subset of n rows
    initial_train_on: object = "full_dataset"
    eval_knn_k: int = 5
    seed: int = 0

    def validate(self, dataset_size: Optional[int] = None):
        if self.iterations < 1:
            raise ConfigError("iterations", f"must be >= 1, got {self.iterations!r}")
        if self.n_select < 1:
            raise ConfigError("n_select", f"must be >= 1, got {self.n_select!r}")
        if dataset_size is not None and self.n_select > dataset_size:
            raise ConfigError("n_select", f"{self.n_select} exceeds dataset size {dataset_size}")
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy", f"must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.strategy == "cluster_balanced":
            if self.cluster is None:
                raise ConfigError("cluster", "cluster_balanced strategy needs a cluster config")
            self.cluster.validate()
            if self.cluster.k * self.cluster.per_cluster != self.n_select:
                raise ConfigError("cluster", "k * per_cluster must equal n_select")
        if self.initial_train_on != "full_dataset":
            n = self.initial_train_on
            if not isinstance(n, int) or n < 1 or (dataset_size is not None and n > dataset_size):
                raise ConfigError("initial_train_on", f"must be 'full_dataset' or a subset size, got {n!r}")
        if self.eval_knn_k < 1:
            raise ConfigError("eval_knn_k", f"must be >= 1, got {self.eval_knn_k!r}")
        if not self.embedder.identity:
            check_layer_dims(self.embedder.layer_dims)
        self.train.validate()


@dataclass
class IterationReport:
    iteration: int
    selected_indices: List[int]
    train_accuracy_on_test: float
    class_size_std: float
    loss_trace: List[float]
    shortfall: dict = field(default_factory=dict)
    wall_time: float = field(default=0.0, compare=False)

    def to_record(self, timing: bool = False) -> dict:
        rec = {
            "iteration": self.iteration,
            "selected_indices": list(self.selected_indices),
            "train_accuracy_on_test": self.train_accuracy_on_test,
            "class_size_std": self.class_size_std,
            "loss_trace": list(self.loss_trace),
            "shortfall": {str(k): v for k, v in self.shortfall.items()},
        }
        if timing:
            rec["wall_time"] = self.wall_time
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "IterationReport":
        return cls(
            iteration=rec["iteration"],
            selected_indices=rec["selected_indices"],
            train_accuracy_on_test=rec["train_accuracy_on_test"],
            class_size_std=rec["class_size_std"],
            loss_trace=rec["loss_trace"],
            shortfall={int(k): v for k, v in rec.get("shortfall", {}).items()},
            wall_time=rec.get("wall_time", 0.0),
        )


def initial_params(config: PipelineConfig, input_dim: int, iteration: int):
    """Fresh (untrained) embedder params used at the start of ``iteration``."""
    dims = list(config.embedder.layer_dims)
    if dims[0] != input_dim:
        raise ConfigError("layer_dims", f"first layer {dims[0]} != data dimension {input_dim}")
    return init_embedder(
        dims,
        config.embedder.activation,
        derive_subseed(config.seed, iteration, "init"),
        config.train.weight_init_scale,
    )


def select(embeddings: np.ndarray, config: PipelineConfig, iteration: int):
    """Returns ``(indices, shortfall)`` for one iteration's selection step."""
    seed = derive_subseed(config.seed, iteration, "select")
    if config.strategy == "diverse":
        return diverse_select(embeddings, config.n_select, seed).indices, {}
    if config.strategy == "random":
        return random_select(embeddings.shape[0], config.n_select, seed), {}
    cluster = ClusterSelectConfig(
        config.cluster.k, config.cluster.per_cluster, config.cluster.max_lloyd_iters, config.cluster.tol, seed
    )
    picked = cluster_balanced_select(embeddings, cluster)
    return picked.indices, picked.shortfall


def run_pipeline(
    dataset: LabeledDataset,
    test_set: LabeledDataset,
    config: PipelineConfig,
    trainer: Callable = train_autoencoder,
) -> List[IterationReport]:
    """Run ``config.iterations`` rounds of train embedder / embed / select / score.

    The embedder is re-initialised and trained from scratch on each round's
    selection. Scoring fits a k-NN on the selected rows' raw features and
    tests it on ``test_set``; labels are never used for selection.
    """
    config.validate(len(dataset))
    if test_set.dim != dataset.dim:
        raise ConfigError("test_set", f"feature dimension {test_set.dim} != dataset dimension {dataset.dim}")
    num_classes = max(dataset.num_classes, test_set.num_classes)
    features = dataset.features

    if config.initial_train_on == "full_dataset":
        train_rows = np.arange(len(dataset))
    else:
        train_rows = np.asarray(
            random_select(len(dataset), config.initial_train_on, derive_subseed(config.seed, 0, "initial"))
        )

    reports = []
    for t in range(config.iterations):
        started = time.perf_counter()
        loss_trace: List[float] = []
        if config.embedder.identity:
            embeddings = features
        else:
            train_cfg = TrainConfig(**{**config.train.__dict__, "seed": derive_subseed(config.seed, t, "train")})
            params, loss_trace = trainer(initial_params(config, dataset.dim, t), features[train_rows], train_cfg)
            embeddings = encode(params, features)
        indices, shortfall = select(embeddings, config, t)
        labels = [dataset.labels[i] for i in indices]
        std = class_size_std(labels, num_classes) if all(lab is not None for lab in labels) else float("nan")
        acc = evaluate_subset(dataset, indices, test_set, config.eval_knn_k)
        reports.append(IterationReport(
            t, list(indices), acc, std, [float(v) for v in loss_trace], shortfall,
            time.perf_counter() - started,
        ))
        train_rows = np.asarray(indices)
    return reports


SUMMARY_HEADER = ["strategy", "seed", "iteration", "accuracy", "class_size_std"]


def summary_rows(strategy: str, seed: int, reports: List[IterationReport]) -> list:
    return [[strategy, seed, r.iteration, repr(r.train_accuracy_on_test), repr(r.class_size_std)] for r in reports]
