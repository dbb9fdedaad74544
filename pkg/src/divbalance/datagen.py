"""Synthetic benchmarks: biased concentric rings and imbalanced Gaussian blobs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from divbalance.errors import ConfigError, GenerationError

_MAX_SEED = 2**64


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or not 0 <= seed < _MAX_SEED:
        raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {seed!r}")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under ``seed``.

    Each ring/class draws from its own stream so output does not depend on
    the order in which groups are generated.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: list = field(default_factory=list)
    ids: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ConfigError("features", f"expected a 2-D matrix, got shape {self.features.shape}")
        n = self.features.shape[0]
        if self.features.shape[1] < 1:
            raise ConfigError("features", "feature dimension must be >= 1")
        if not self.labels:
            self.labels = [None] * n
        if not self.ids:
            self.ids = list(range(n))
        self.labels = [None if lab is None else int(lab) for lab in self.labels]
        if len(self.labels) != n or len(self.ids) != n:
            raise ConfigError("labels", f"{n} rows but {len(self.labels)} labels and {len(self.ids)} ids")
        if len(set(self.ids)) != n:
            raise ConfigError("ids", "record identifiers must be unique")
        if any(lab is not None and lab < 0 for lab in self.labels):
            raise ConfigError("labels", "labels must be non-negative")

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return all(lab is not None for lab in self.labels)

    @property
    def num_classes(self) -> int:
        present = [lab for lab in self.labels if lab is not None]
        return max(present) + 1 if present else 0

    def label_array(self) -> np.ndarray:
        if not self.has_labels:
            raise ConfigError("labels", "dataset has unlabeled records")
        return np.asarray(self.labels, dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = [int(i) for i in indices]
        return LabeledDataset(
            self.features[idx].reshape(len(idx), self.dim),
            [self.labels[i] for i in idx],
            [self.ids[i] for i in idx],
        )

    def without_labels(self) -> "LabeledDataset":
        return LabeledDataset(self.features.copy(), [None] * len(self), list(self.ids))

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and self.labels == other.labels
            and self.ids == other.ids
        )


@dataclass
class CirclesConfig:
    num_rings: int = 10
    base_count: int = 100
    odd_ratio: int = 8
    ring_gap: float = 1.0
    radial_noise: float = 0.05
    seed: int = 0

    def validate(self):
        for name in ("num_rings", "base_count", "odd_ratio"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value!r}")
        if not self.ring_gap > 0:
            raise ConfigError("ring_gap", f"must be > 0, got {self.ring_gap!r}")
        if not self.radial_noise >= 0:
            raise ConfigError("radial_noise", f"must be >= 0, got {self.radial_noise!r}")
        _check_seed(self.seed)

    def ring_count(self, ring: int) -> int:
        """Points on ring ``ring`` (1 = outermost)."""
        return self.odd_ratio * self.base_count if ring % 2 == 1 else self.base_count

    def ring_radius(self, ring: int) -> float:
        return (self.num_rings - ring + 1) * self.ring_gap

    @property
    def total(self) -> int:
        return sum(self.ring_count(k) for k in range(1, self.num_rings + 1))


@dataclass
class BlobsConfig:
    num_classes: int = 4
    class_counts: list = field(default_factory=lambda: [400, 50, 50, 25])
    dim: int = 8
    cluster_std: float = 1.0
    center_separation: float = 6.0
    seed: int = 0
    max_attempts: int = 10_000

    def validate(self):
        if not isinstance(self.num_classes, (int, np.integer)) or self.num_classes < 1:
            raise ConfigError("num_classes", f"must be a positive integer, got {self.num_classes!r}")
        if len(self.class_counts) != self.num_classes:
            raise ConfigError(
                "class_counts", f"length {len(self.class_counts)} != num_classes {self.num_classes}"
            )
        if any(not isinstance(c, (int, np.integer)) or c < 1 for c in self.class_counts):
            raise ConfigError("class_counts", "all counts must be positive integers")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ConfigError("dim", f"must be a positive integer, got {self.dim!r}")
        if not self.cluster_std >= 0:
            raise ConfigError("cluster_std", f"must be >= 0, got {self.cluster_std!r}")
        if not self.center_separation > 0:
            raise ConfigError("center_separation", f"must be > 0, got {self.center_separation!r}")
        _check_seed(self.seed)


def generate_biased_circles(config: CirclesConfig) -> LabeledDataset:
    """Concentric noisy rings; odd rings (counted from the outside) are ``odd_ratio`` times denser.

    Ring ``k`` gets label ``k - 1`` and radius ``(num_rings - k + 1) * ring_gap``.
    """
    config.validate()
    blocks, labels = [], []
    for ring in range(1, config.num_rings + 1):
        count = config.ring_count(ring)
        rng = substream(config.seed, ring)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
        radius = config.ring_radius(ring) + rng.normal(0.0, config.radial_noise, size=count)
        blocks.append(np.column_stack([radius * np.cos(theta), radius * np.sin(theta)]))
        labels.extend([ring - 1] * count)
    return LabeledDataset(np.vstack(blocks), labels)


def _place_centers(config: BlobsConfig) -> np.ndarray:
    rng = substream(config.seed, 0)
    # cube large enough that random placement rarely collides
    half = config.center_separation * max(1.0, config.num_classes ** (1.0 / config.dim))
    centers = []
    attempts = 0
    while len(centers) < config.num_classes:
        if attempts >= config.max_attempts:
            raise GenerationError(
                f"placed {len(centers)} of {config.num_classes} centers after {attempts} attempts"
            )
        attempts += 1
        candidate = rng.uniform(-half, half, size=config.dim)
        if all(np.linalg.norm(candidate - c) >= config.center_separation for c in centers):
            centers.append(candidate)
    return np.array(centers)


def generate_imbalanced_blobs(config: BlobsConfig, centers: Optional[np.ndarray] = None) -> LabeledDataset:
    """Gaussian clusters with per-class sizes from ``config.class_counts``.

    Centers are placed by rejection sampling so every pair is at least
    ``center_separation`` apart.
    """
    config.validate()
    if centers is None:
        centers = _place_centers(config)
    blocks, labels = [], []
    for c, count in enumerate(config.class_counts):
        rng = substream(config.seed, 1, c)
        noise = rng.normal(0.0, 1.0, size=(count, config.dim))
        blocks.append(centers[c] + config.cluster_std * noise)
        labels.extend([c] * count)
    return LabeledDataset(np.vstack(blocks), labels)


def blob_centers(config: BlobsConfig) -> np.ndarray:
    config.validate()
    return _place_centers(config)
