"""Few-shot evaluation over precomputed image embeddings.

Nearest-centroid classification with feature transforms, deterministic
episodic sampling, and canonical report output. Datasets travel as
single-file embedding stores; see `store` for the format and `cli` for
the command-line surface.
"""

from .errors import (
    ConfigError,
    CorruptionError,
    DegenerateVectorError,
    DimensionError,
    DomainError,
    EmptyResultError,
    FormatError,
    FsbenchError,
    InfeasibleQueryError,
    InfeasibleSpecError,
    InsufficientDataError,
    MappingError,
    ProtocolError,
    ValidationError,
)
from .evaluation import (
    AggregateConfusion,
    EpisodeResult,
    RunSummary,
    aggregate_confusion,
    run_cell,
    run_episode,
    score_predictions,
    summary_csv_row,
    summary_to_json,
)
from .mapping import LabelMapping, normalize_class_name, normalize_dataset_name
from .ops import (
    FeatureMap,
    TransformMode,
    adaptive_avg_pool,
    euclidean_distance_sq,
    pairwise_sq_distances,
    transform,
)
from .protocols import (
    DATASET_INVENTORIES,
    ProtocolGrid,
    builtin_protocols,
    expected_mapped_counts,
    select_protocols,
    validate_mapping,
)
from .rng import Xoshiro256StarStar, derive_seed, splitmix64
from .sampler import Episode, EpisodeSpec, sample_cross_episode, sample_episode
from .simpleshot import (
    Prediction,
    PrototypeSet,
    classify,
    classify_batch,
    compute_prototypes,
)
from .stats import ConfidenceInterval, mean_confidence_interval, t_cdf, t_quantile
from .store import (
    EmbeddingDataset,
    read_dataset,
    remap_labels,
    write_dataset,
)
from .synthetic import make_gaussian_clusters
from .version import __version__

__all__ = [
    "AggregateConfusion",
    "ConfidenceInterval",
    "ConfigError",
    "CorruptionError",
    "DATASET_INVENTORIES",
    "DegenerateVectorError",
    "DimensionError",
    "DomainError",
    "EmbeddingDataset",
    "EmptyResultError",
    "Episode",
    "EpisodeResult",
    "EpisodeSpec",
    "FeatureMap",
    "FormatError",
    "FsbenchError",
    "InfeasibleQueryError",
    "InfeasibleSpecError",
    "InsufficientDataError",
    "LabelMapping",
    "MappingError",
    "Prediction",
    "ProtocolError",
    "ProtocolGrid",
    "PrototypeSet",
    "RunSummary",
    "TransformMode",
    "ValidationError",
    "Xoshiro256StarStar",
    "__version__",
    "adaptive_avg_pool",
    "aggregate_confusion",
    "builtin_protocols",
    "classify",
    "classify_batch",
    "compute_prototypes",
    "derive_seed",
    "euclidean_distance_sq",
    "expected_mapped_counts",
    "make_gaussian_clusters",
    "mean_confidence_interval",
    "normalize_class_name",
    "normalize_dataset_name",
    "pairwise_sq_distances",
    "read_dataset",
    "remap_labels",
    "run_cell",
    "run_episode",
    "sample_cross_episode",
    "sample_episode",
    "score_predictions",
    "select_protocols",
    "splitmix64",
    "summary_csv_row",
    "summary_to_json",
    "t_cdf",
    "t_quantile",
    "transform",
    "validate_mapping",
    "write_dataset",
]
