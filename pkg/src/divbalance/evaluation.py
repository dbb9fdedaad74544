"""k-NN scoring, class-balance metrics and the random-vs-diverse crossover sweep."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from divbalance.datagen import LabeledDataset
from divbalance.errors import ConfigError, ShapeError
from divbalance.selection import diverse_select, random_select

_CHUNK = 256


@dataclass
class EvalSplit:
    train_indices: List[int]
    test_indices: List[int]
    balance_mode: str = "as_is"

    def __post_init__(self):
        if set(self.train_indices) & set(self.test_indices):
            raise ConfigError("test_indices", "train and test indices overlap")


def knn_predict(train: LabeledDataset, query, k: int = 5) -> List[int]:
    """Majority vote among the ``k`` nearest training rows.

    Distance ties go to the lower training index, vote ties to the smaller label.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k!r}")
    labels = train.label_array()
    q = np.asarray(query, dtype=np.float64)
    if q.ndim == 1 and q.size == 0:
        q = q.reshape(0, train.dim)
    if q.ndim != 2 or q.shape[1] != train.dim:
        raise ShapeError(f"query has shape {q.shape}, training features are {train.features.shape}")
    n_labels = int(labels.max()) + 1
    out = []
    for start in range(0, q.shape[0], _CHUNK):
        block = q[start:start + _CHUNK]
        d2 = np.sum((block[:, None, :] - train.features[None, :, :]) ** 2, axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        for row in labels[nearest]:
            # argmax returns the first (smallest) label among equal vote counts
            out.append(int(np.argmax(np.bincount(row, minlength=n_labels))))
    return out


def accuracy(predicted, actual) -> float:
    if len(predicted) != len(actual):
        raise ShapeError(f"length mismatch: {len(predicted)} predictions, {len(actual)} labels")
    if len(actual) == 0:
        raise ValueError("accuracy of an empty list is undefined")
    return float(np.mean(np.asarray(predicted) == np.asarray(actual)))


def class_counts(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    return np.bincount(labels, minlength=num_classes)


def class_size_std(labels_of_selected, num_classes: int) -> float:
    """Population std of the per-class count vector (absent classes count 0)."""
    if num_classes < 1:
        raise ValueError("num_classes must be >= 1")
    return float(np.std(class_counts(labels_of_selected, num_classes)))


def make_split(dataset: LabeledDataset, test_fraction: float, balance_mode: str = "as_is", seed: int = 0) -> EvalSplit:
    """Seeded train/test split.

    With ``class_balanced`` the test side is cut down to ``min class count``
    rows per class; the rows it drops go back to the training side.
    """
    if not 0 < test_fraction < 1:
        raise ConfigError("test_fraction", f"must be in (0, 1), got {test_fraction!r}")
    if balance_mode not in ("as_is", "class_balanced"):
        raise ConfigError("balance_mode", f"must be 'as_is' or 'class_balanced', got {balance_mode!r}")
    labels = dataset.label_array()
    n = len(dataset)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    test, train = perm[:n_test], perm[n_test:]
    if balance_mode == "class_balanced":
        num_classes = dataset.num_classes
        per_class = [test[labels[test] == c] for c in range(num_classes)]
        smallest = min(len(p) for p in per_class)
        if smallest == 0:
            empty = [c for c, p in enumerate(per_class) if len(p) == 0]
            raise ConfigError("test_fraction", f"classes {empty} have no test members")
        kept = np.concatenate([p[:smallest] for p in per_class])
        train = np.concatenate([train, np.setdiff1d(test, kept)])
        test = kept
    return EvalSplit(sorted(int(i) for i in train), sorted(int(i) for i in test), balance_mode)


def evaluate_subset(dataset: LabeledDataset, subset, test: LabeledDataset, k: int = 5) -> float:
    """Accuracy on ``test`` of a k-NN fitted to ``dataset`` rows ``subset``."""
    train = dataset.subset(subset)
    pred = knn_predict(train, test.features, min(k, len(train)))
    return accuracy(pred, test.labels)


@dataclass
class CrossoverResult:
    ratio: Optional[float]
    diverse_accuracy: float
    sweep: list

    @property
    def reached(self) -> bool:
        return self.ratio is not None


def sweep_sizes(n_diverse: int, cap: int, step: float = 0.25) -> List[int]:
    sizes, j = [], 0
    while True:
        size = min(int(round(n_diverse * (1.0 + step * j))), cap)
        if not sizes or size > sizes[-1]:
            sizes.append(size)
        if size >= cap:
            return sizes
        j += 1


def crossover_ratio(dataset: LabeledDataset, split: EvalSplit, n_diverse: int, k: int = 5, seed_count: int = 10) -> CrossoverResult:
    """How much random training data matches diverse selection at ``n_diverse``.

    Selection runs on the raw training-side features; seeds are
    ``0 .. seed_count-1``. ``ratio`` is ``None`` when random selection never
    catches up before the training pool runs out.
    """
    pool = np.asarray(split.train_indices)
    if not 1 <= n_diverse <= len(pool):
        raise ValueError(f"n_diverse must be in [1, {len(pool)}], got {n_diverse!r}")
    test = dataset.subset(split.test_indices)
    features = dataset.features[pool]
    seeds = range(seed_count)
    diverse = float(np.mean([
        evaluate_subset(dataset, pool[diverse_select(features, n_diverse, s).indices], test, k)
        for s in seeds
    ]))
    sweep = []
    for size in sweep_sizes(n_diverse, len(pool)):
        rand = float(np.mean([
            evaluate_subset(dataset, pool[random_select(len(pool), size, s)], test, k) for s in seeds
        ]))
        sweep.append((size, rand))
        if rand >= diverse:
            return CrossoverResult(size / n_diverse, diverse, sweep)
    return CrossoverResult(None, diverse, sweep)
