"""Seabed image complexity toolkit (C++ core)."""

from ._sasc import (
    DataError,
    compression_ratio,
    dynamic_range_compress,
    edge_intensity,
    expected_score,
    lacunarity,
    linear_regression,
    median_filter,
    metric_vector,
    pearson,
    run_replicated,
    run_sequence,
    simulate_judgments,
    spearman,
    structural_entropy,
    synthesize_chip,
)

__all__ = [
    "DataError",
    "compression_ratio",
    "dynamic_range_compress",
    "edge_intensity",
    "expected_score",
    "lacunarity",
    "linear_regression",
    "median_filter",
    "metric_vector",
    "pearson",
    "run_replicated",
    "run_sequence",
    "simulate_judgments",
    "spearman",
    "structural_entropy",
    "synthesize_chip",
]
