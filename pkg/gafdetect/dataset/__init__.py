from .synthetic import SyntheticConfig, generate_synthetic
from .pipeline import (
    Candidate,
    DatasetConfig,
    DatasetManifest,
    SampleRecord,
    Split,
    Target,
    assign_window_size,
    balance,
    build_dataset,
    collect_similar,
    deduplicate,
    nearest_target_distances,
    select_top_targets,
    split_counts,
)
from .container import load_dataset, save_dataset

__all__ = [
    "SyntheticConfig",
    "generate_synthetic",
    "Candidate",
    "DatasetConfig",
    "DatasetManifest",
    "SampleRecord",
    "Split",
    "Target",
    "assign_window_size",
    "balance",
    "build_dataset",
    "collect_similar",
    "deduplicate",
    "nearest_target_distances",
    "select_top_targets",
    "split_counts",
    "load_dataset",
    "save_dataset",
]
