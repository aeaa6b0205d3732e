"""Figures and statistical tests over evomod run directories."""

__version__ = "0.1.0"

from .loading import AnalysisError, RunData, RunSet, load_run_directory
from .stats import holm, mean_ci, pairwise_tests, rank_sum_p, representative_index
from .figures import (
    fitness_curves,
    metric_curves,
    module_distribution,
    normalized_distribution,
    projection_heatmaps,
)
from .cli import analyze

__all__ = [
    "AnalysisError",
    "RunData",
    "RunSet",
    "analyze",
    "fitness_curves",
    "holm",
    "load_run_directory",
    "mean_ci",
    "metric_curves",
    "module_distribution",
    "normalized_distribution",
    "pairwise_tests",
    "projection_heatmaps",
    "rank_sum_p",
    "representative_index",
]
