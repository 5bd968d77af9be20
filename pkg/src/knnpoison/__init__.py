"""Near-optimal label-flip poisoning attacks against k-nearest-neighbor
classification on Euclidean point sets, built on multi-scale random
partitions, exact per-cluster search, and a budget dynamic program."""

from .config import PartitionStats, RunConfig, TrialStats
from .core import (
    LabeledDataset,
    NeighborIndex,
    build_neighbor_index,
    evaluate_corruption,
    flip_labels,
    gamma_of,
    predict,
    predict_all,
)
from .errors import (
    ClusterTooLarge,
    DuplicatePoints,
    InstanceTooLarge,
    KnnPoisonError,
    KTooLarge,
    NonpositiveRadius,
    ParseError,
    UnknownQuery,
)
from .io import load_dataset, read_plan, write_dataset, write_plan
from .oracle import OracleResult, opt_exact, opt_exact_traintest, solve_cluster_reference
from .partition import (
    GridPartitionConfig,
    MultiScaleConfig,
    PartitionSample,
    assign_external,
    closest_pairs,
    diameter_violations,
    euclidean_poison_partition,
    sample_grid_partition,
    sample_multiscale,
    separation_frequencies,
)
from .poison import (
    BudgetEntry,
    ClusterPoisonTable,
    DPTable,
    PoisonPlan,
    combine_dp,
    greedy_baseline,
    interior_points,
    knn_flip,
    knn_flip_traintest,
    multiscale_config_for,
    solve_cluster,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetEntry",
    "ClusterPoisonTable",
    "ClusterTooLarge",
    "DPTable",
    "DuplicatePoints",
    "GridPartitionConfig",
    "InstanceTooLarge",
    "KTooLarge",
    "KnnPoisonError",
    "LabeledDataset",
    "MultiScaleConfig",
    "NeighborIndex",
    "NonpositiveRadius",
    "OracleResult",
    "ParseError",
    "PartitionSample",
    "PartitionStats",
    "PoisonPlan",
    "RunConfig",
    "TrialStats",
    "UnknownQuery",
    "assign_external",
    "build_neighbor_index",
    "closest_pairs",
    "combine_dp",
    "diameter_violations",
    "euclidean_poison_partition",
    "evaluate_corruption",
    "flip_labels",
    "gamma_of",
    "greedy_baseline",
    "interior_points",
    "knn_flip",
    "knn_flip_traintest",
    "load_dataset",
    "multiscale_config_for",
    "opt_exact",
    "opt_exact_traintest",
    "predict",
    "predict_all",
    "read_plan",
    "sample_grid_partition",
    "sample_multiscale",
    "separation_frequencies",
    "solve_cluster",
    "solve_cluster_reference",
    "write_dataset",
    "write_plan",
]
