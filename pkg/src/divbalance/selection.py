"""Subset selection over an embedding matrix.

None of these functions see labels: they take a plain ``(N, d)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from divbalance.errors import ConfigError, ShapeError


@dataclass
class SelectionResult:
    indices: List[int]
    minmax_trace: List[float]
    seed: int = 0

    def __post_init__(self):
        self.indices = [int(i) for i in self.indices]
        self.minmax_trace = [float(v) for v in self.minmax_trace]


@dataclass
class ClusterSelectConfig:
    k: int = 10
    per_cluster: int = 50
    max_lloyd_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def validate(self):
        if self.k < 1:
            raise ConfigError("k", f"must be >= 1, got {self.k!r}")
        if self.per_cluster < 1:
            raise ConfigError("per_cluster", f"must be >= 1, got {self.per_cluster!r}")
        if self.max_lloyd_iters < 1:
            raise ConfigError("max_lloyd_iters", f"must be >= 1, got {self.max_lloyd_iters!r}")
        if not self.tol >= 0:
            raise ConfigError("tol", f"must be >= 0, got {self.tol!r}")


@dataclass
class ClusterSelection:
    indices: List[int]
    cluster_sizes: List[int]
    shortfall: Dict[int, int] = field(default_factory=dict)

    @property
    def short(self) -> bool:
        return bool(self.shortfall)


def _as_matrix(embeddings) -> np.ndarray:
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ShapeError(f"embeddings must be an (N, d) matrix, got shape {x.shape}")
    return x


def _check_n(n, total):
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= total:
        raise ValueError(f"n must be in [1, {total}], got {n!r}")


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"vector lengths differ: {a.size} vs {b.size}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def distances_to(x: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Euclidean distance from every row of ``x`` to ``point``.

    Each row's value is computed independently of the others.
    """
    return np.sqrt(np.sum((x - point) ** 2, axis=1))


def seed_index(n_rows: int, seed: int) -> int:
    return int(np.random.default_rng(seed).integers(n_rows))


def diverse_select(embeddings, n: int, seed: int = 0, start: int | None = None) -> SelectionResult:
    """Greedy max-min (farthest-point) selection of ``n`` rows.

    The first row is drawn uniformly from ``seed`` (or given by ``start``).
    Each subsequent pick is the unselected row whose distance to its nearest
    selected row is largest; ties go to the lowest index. ``minmax_trace[t]``
    is that distance at pick ``t`` (``inf`` for the random first pick).
    """
    x = _as_matrix(embeddings)
    total = x.shape[0]
    _check_n(n, total)
    first = seed_index(total, seed) if start is None else int(start)
    if not 0 <= first < total:
        raise ValueError(f"start index {first} out of range [0, {total})")

    nearest = np.full(total, np.inf)
    selected = np.zeros(total, dtype=bool)
    indices = [first]
    trace = [float("inf")]
    selected[first] = True
    for _ in range(n - 1):
        np.minimum(nearest, distances_to(x, x[indices[-1]]), out=nearest)
        candidates = np.where(selected, -np.inf, nearest)
        best = int(np.argmax(candidates))
        indices.append(best)
        trace.append(float(nearest[best]))
        selected[best] = True
    return SelectionResult(indices, trace, seed)


def brute_force_diverse_select(embeddings, n: int, seed_index: int) -> SelectionResult:
    """Reference farthest-point selection that recomputes every min-distance from scratch."""
    x = _as_matrix(embeddings)
    total = x.shape[0]
    _check_n(n, total)
    if not 0 <= seed_index < total:
        raise ValueError(f"seed_index {seed_index} out of range [0, {total})")
    chosen = [int(seed_index)]
    trace = [float("inf")]
    while len(chosen) < n:
        best, best_dist = -1, -1.0
        for i in range(total):
            if i in chosen:
                continue
            d = min(euclidean_distance(x[i], x[j]) for j in chosen)
            if d > best_dist:
                best, best_dist = i, d
        chosen.append(best)
        trace.append(best_dist)
    return SelectionResult(chosen, trace, seed_index)


def random_select(n_total: int, n: int, seed: int = 0) -> List[int]:
    _check_n(n, n_total)
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.choice(n_total, size=n, replace=False)]


def _kmeans_pp(x, k, rng):
    total = x.shape[0]
    centers = [int(rng.integers(total))]
    closest = np.sum((x - x[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        mass = closest.sum()
        if mass > 0:
            pick = int(rng.choice(total, p=closest / mass))
        else:
            # every remaining point duplicates a center
            taken = set(centers)
            pick = next(i for i in range(total) if i not in taken)
        centers.append(pick)
        np.minimum(closest, np.sum((x - x[pick]) ** 2, axis=1), out=closest)
    return x[centers].copy()


def _assign(x, centroids):
    d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1), d2


def kmeans(embeddings, k: int, max_iters: int = 100, tol: float = 1e-6, seed: int = 0):
    """Lloyd's algorithm with k-means++ seeding.

    Clusters are renumbered by their lowest member index, so the output does
    not depend on seeding order. Returns ``(centroids, assignment)``.
    """
    x = _as_matrix(embeddings)
    total = x.shape[0]
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= total:
        raise ValueError(f"k must be in [1, {total}], got {k!r}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng)
    for _ in range(max_iters):
        labels, d2 = _assign(x, centroids)
        own = d2[np.arange(total), labels]
        for c in range(k):
            if not np.any(labels == c):
                far = int(np.argmax(own))
                labels[far] = c
                own[far] = 0.0
        moved = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                moved[c] = x[members].mean(axis=0)
        shift = np.max(np.abs(moved - centroids))
        centroids = moved
        if shift <= tol:
            break
    labels, _ = _assign(x, centroids)
    order = sorted(range(k), key=lambda c: (np.flatnonzero(labels == c)[:1].tolist() or [total], c))
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return centroids[order], [int(c) for c in remap[labels]]


def cluster_balanced_select(embeddings, config: ClusterSelectConfig) -> ClusterSelection:
    """k-means, then the ``per_cluster`` members nearest each centroid.

    Small clusters contribute everything they have; the missing counts are
    reported in ``shortfall`` rather than padded.
    """
    config.validate()
    x = _as_matrix(embeddings)
    centroids, assignment = kmeans(x, config.k, config.max_lloyd_iters, config.tol, config.seed)
    assignment = np.asarray(assignment)
    picked, sizes, shortfall = [], [], {}
    for c in range(config.k):
        members = np.flatnonzero(assignment == c)
        sizes.append(int(members.size))
        d = distances_to(x[members], centroids[c])
        # stable sort keeps lowest index first among equal distances
        order = members[np.argsort(d, kind="stable")]
        take = min(config.per_cluster, members.size)
        picked.extend(int(i) for i in order[:take])
        if take < config.per_cluster:
            shortfall[c] = config.per_cluster - take
    return ClusterSelection(picked, sizes, shortfall)
