import itertools

import numpy as np
import pytest

from divbalance.datagen import BlobsConfig, CirclesConfig, generate_biased_circles, generate_imbalanced_blobs
from divbalance.embedder import TrainConfig, train_autoencoder
from divbalance.errors import ConfigError
from divbalance.evaluation import class_size_std, evaluate_subset, make_split
from divbalance.pipeline import (
    EmbedderSpec,
    IterationReport,
    PipelineConfig,
    derive_subseed,
    initial_params,
    run_pipeline,
)
from divbalance.selection import ClusterSelectConfig, diverse_select


@pytest.fixture(scope="module")
def circles_split():
    ds = generate_biased_circles(CirclesConfig(num_rings=6, base_count=30, odd_ratio=8))
    split = make_split(ds, 0.2, "class_balanced", 0)
    return ds.subset(split.train_indices), ds.subset(split.test_indices)


@pytest.fixture(scope="module")
def blobs_split():
    ds = generate_imbalanced_blobs(BlobsConfig(class_counts=[120, 30, 30, 20], dim=6, seed=1))
    split = make_split(ds, 0.25, "class_balanced", 0)
    return ds.subset(split.train_indices), ds.subset(split.test_indices)


def test_subseed_basics():
    assert derive_subseed(1, 2, "select") == derive_subseed(1, 2, "select")
    assert derive_subseed(0, 0, "select") != derive_subseed(0, 0, "train")
    assert 0 <= derive_subseed(5, 5, "x") < 2**64


def test_subseed_no_collisions():
    triples = itertools.product(range(20), range(100), ("select", "train", "init", "initial", "x", ""))
    seeds = [derive_subseed(*t) for t in itertools.islice(triples, 10_000)]
    assert len(seeds) == 10_000
    assert len(set(seeds)) == len(seeds)


def test_single_iteration_identity_matches_standalone(circles_split):
    train, test = circles_split
    cfg = PipelineConfig(iterations=1, n_select=60, strategy="diverse", seed=4)
    (report,) = run_pipeline(train, test, cfg)
    picked = diverse_select(train.features, 60, derive_subseed(4, 0, "select")).indices
    assert report.selected_indices == picked
    assert report.class_size_std == class_size_std([train.labels[i] for i in picked], 6)
    assert report.train_accuracy_on_test == evaluate_subset(train, picked, test, 5)
    assert report.loss_trace == []


def test_report_length_and_determinism(blobs_split):
    train, test = blobs_split
    cfg = PipelineConfig(
        iterations=3, n_select=40, strategy="diverse",
        embedder=EmbedderSpec([6, 8, 3, 8, 6]), train=TrainConfig(epochs=5), seed=2,
    )
    a = run_pipeline(train, test, cfg)
    b = run_pipeline(train, test, cfg)
    assert len(a) == 3
    assert a == b
    assert all(len(r.selected_indices) == 40 and len(r.loss_trace) == 5 for r in a)


def test_retrained_from_scratch(blobs_split):
    train, test = blobs_split
    cfg = PipelineConfig(
        iterations=3, n_select=30, embedder=EmbedderSpec([6, 4, 2, 4, 6]), train=TrainConfig(epochs=2), seed=11,
    )
    seen = []

    def spy(params, data, config):
        seen.append((params.copy(), len(data)))
        return train_autoencoder(params, data, config)

    reports = run_pipeline(train, test, cfg, trainer=spy)
    assert len(seen) == 3
    for t, (params, rows) in enumerate(seen):
        assert params == initial_params(cfg, train.dim, t)
        assert rows == (len(train) if t == 0 else 30)
    assert [r.iteration for r in reports] == [0, 1, 2]


def test_initial_random_subset(blobs_split):
    train, test = blobs_split
    sizes = []

    def spy(params, data, config):
        sizes.append(len(data))
        return train_autoencoder(params, data, config)

    cfg = PipelineConfig(iterations=1, n_select=20, initial_train_on=50,
                         embedder=EmbedderSpec([6, 3, 6]), train=TrainConfig(epochs=1))
    run_pipeline(train, test, cfg, trainer=spy)
    assert sizes == [50]


def test_cluster_balanced_strategy(blobs_split):
    train, test = blobs_split
    cfg = PipelineConfig(iterations=2, n_select=40, strategy="cluster_balanced",
                         cluster=ClusterSelectConfig(k=4, per_cluster=10))
    reports = run_pipeline(train, test, cfg)
    assert all(len(r.selected_indices) + sum(r.shortfall.values()) == 40 for r in reports)


def test_diverse_beats_random_balance_on_circles(circles_split):
    train, test = circles_split
    std = {}
    for strategy in ("diverse", "random"):
        runs = [run_pipeline(train, test, PipelineConfig(iterations=3, n_select=100, strategy=strategy, seed=s))
                for s in range(5)]
        std[strategy] = np.mean([[r.class_size_std for r in run] for run in runs], axis=0)
    assert np.all(std["diverse"] < std["random"])


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(iterations=0), "iterations"),
        (dict(n_select=10_000), "n_select"),
        (dict(strategy="greedy"), "strategy"),
        (dict(strategy="cluster_balanced"), "cluster"),
        (dict(strategy="cluster_balanced", n_select=30, cluster=ClusterSelectConfig(k=4, per_cluster=5)), "cluster"),
        (dict(embedder=EmbedderSpec([6, 8])), "layer_dims"),
        (dict(initial_train_on="half"), "initial_train_on"),
    ],
)
def test_config_errors(blobs_split, kwargs, field):
    train, test = blobs_split
    with pytest.raises(ConfigError) as exc:
        run_pipeline(train, test, PipelineConfig(**kwargs))
    assert exc.value.field == field


def test_dimension_mismatch(blobs_split, circles_split):
    with pytest.raises(ConfigError):
        run_pipeline(blobs_split[0], circles_split[1], PipelineConfig(n_select=5))


def test_report_record_round_trip():
    r = IterationReport(2, [3, 1], 0.5, 1.25, [0.3, 0.2], {1: 4}, wall_time=9.0)
    rec = r.to_record()
    assert "wall_time" not in rec
    assert IterationReport.from_record(rec) == r
    assert r.to_record(timing=True)["wall_time"] == 9.0
