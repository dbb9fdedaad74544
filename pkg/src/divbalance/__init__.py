"""Diverse (farthest-point) sample selection for balancing unlabeled data."""

from divbalance.datagen import (
    BlobsConfig,
    CirclesConfig,
    LabeledDataset,
    generate_biased_circles,
    generate_imbalanced_blobs,
)
from divbalance.embedder import (
    EmbedderParams,
    TrainConfig,
    encode,
    gradient,
    init_embedder,
    mse_loss,
    reconstruct,
    train_autoencoder,
)
from divbalance.evaluation import (
    EvalSplit,
    accuracy,
    class_size_std,
    crossover_ratio,
    knn_predict,
    make_split,
)
from divbalance.pipeline import IterationReport, PipelineConfig, derive_subseed, run_pipeline
from divbalance.selection import (
    ClusterSelectConfig,
    SelectionResult,
    brute_force_diverse_select,
    cluster_balanced_select,
    diverse_select,
    euclidean_distance,
    kmeans,
    random_select,
)

__version__ = "0.1.0"
