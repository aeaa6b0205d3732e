"""Figure rendering: fitness/QD/coverage curves, repertoire heatmaps and
module-distribution histograms.

Pure data-shaping helpers are separated from rendering so the numbers behind
each plot are testable; rendering itself is deterministic (fixed backend,
no timestamps in metadata).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .loading import AnalysisError, RunSet
from .stats import mean_ci, representative_index

ALGORITHM_COLORS = {
    "ea": "tab:blue",
    "nsga2": "tab:orange",
    "map_elites": "tab:green",
}
_PNG_METADATA = {"Software": "evomod-analysis"}


def _color(algorithm: str) -> str:
    return ALGORITHM_COLORS.get(algorithm, "tab:gray")


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# data shaping
# ---------------------------------------------------------------------------


def metric_band(runset: RunSet, column: str) -> pd.DataFrame:
    """Per-generation mean and 95% CI half-width of `column` across runs."""
    series = np.column_stack([run.stats[column].to_numpy(float) for run in runset.runs])
    mean, half = mean_ci(series, axis=1)
    return pd.DataFrame(
        {
            "generation": runset.runs[0].stats["generation"].to_numpy(int),
            "mean": mean,
            "ci_half": half,
        }
    )


def normalized_distribution(runset: RunSet, column: str) -> tuple:
    """Distribution of `column` over time, pooled across repetitions.

    Returns (generations, values, matrix) where matrix[v, g] is the fraction
    of the pooled census at generation g having value v; every column with
    any data sums to exactly 1.
    """
    pooled = pd.concat([run.histogram for run in runset.runs], ignore_index=True)
    table = pooled.groupby(["generation", column])["count"].sum().unstack(fill_value=0)
    generations = table.index.to_numpy(int)
    values = table.columns.to_numpy(int)
    matrix = table.to_numpy(float).T
    sums = matrix.sum(axis=0)
    if np.any(sums == 0.0):
        empty = generations[sums == 0.0].tolist()
        raise AnalysisError(
            f"{runset.algorithm}: zero-population histogram columns at "
            f"generations {empty}"
        )
    return generations, values, matrix / sums


def archive_grid(frame: pd.DataFrame, eta: int) -> np.ndarray:
    """(eta x eta+1) fitness grid indexed [j, m], NaN where unoccupied."""
    grid = np.full((eta, eta + 1), np.nan)
    for m, j, fitness in zip(frame["m"], frame["j"], frame["fitness"]):
        grid[int(j), int(m)] = fitness
    return grid


def _checkpoint_frames(runset: RunSet, checkpoint) -> list:
    if checkpoint is None:
        return [run.archive for run in runset.runs]
    missing = [run.seed for run in runset.runs if checkpoint not in run.checkpoints]
    if missing:
        raise AnalysisError(
            f"{runset.algorithm}: checkpoint generation {checkpoint} missing for "
            f"seeds {missing}"
        )
    return [run.checkpoints[checkpoint] for run in runset.runs]


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def fitness_curves(runsets: dict, out_path: Path) -> pd.DataFrame:
    """Mean max-fitness with 95% CI band per algorithm, plus the final
    distribution; returns the per-algorithm final summary table."""
    fig, (ax_curve, ax_dist) = plt.subplots(
        1, 2, figsize=(10, 4), gridspec_kw={"width_ratios": [2.2, 1]}
    )
    summary_rows = []
    labels = []
    finals = []
    for algorithm, runset in sorted(runsets.items()):
        band = metric_band(runset, "max_fitness")
        color = _color(algorithm)
        ax_curve.plot(band["generation"], band["mean"], label=algorithm, color=color)
        ax_curve.fill_between(
            band["generation"],
            band["mean"] - band["ci_half"],
            band["mean"] + band["ci_half"],
            alpha=0.25,
            color=color,
            linewidth=0,
        )
        final = runset.final_max_fitness()
        labels.append(algorithm)
        finals.append(final)
        summary_rows.append(
            {
                "algorithm": algorithm,
                "final_mean": float(np.mean(final)),
                "final_std": float(np.std(final, ddof=1)) if len(final) > 1 else 0.0,
                "final_median": float(np.median(final)),
            }
        )
    ax_curve.set_xlabel("generation")
    ax_curve.set_ylabel("max fitness")
    ax_curve.legend()
    parts = ax_dist.violinplot(finals, showmedians=True)
    for body, algorithm in zip(parts["bodies"], labels):
        body.set_facecolor(_color(algorithm))
    ax_dist.set_xticks(range(1, len(labels) + 1), labels, rotation=20)
    ax_dist.set_ylabel("final max fitness")
    fig.tight_layout()
    _save(fig, out_path)
    return pd.DataFrame(summary_rows)


def metric_curves(runsets: dict, column: str, ylabel: str, out_path: Path) -> None:
    """Mean WITH 95% CI band of one stats column per algorithm."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for algorithm, runset in sorted(runsets.items()):
        band = metric_band(runset, column)
        color = _color(algorithm)
        ax.plot(band["generation"], band["mean"], label=algorithm, color=color)
        ax.fill_between(
            band["generation"],
            band["mean"] - band["ci_half"],
            band["mean"] + band["ci_half"],
            alpha=0.25,
            color=color,
            linewidth=0,
        )
    ax.set_xlabel("generation")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)


def projection_heatmaps(runsets: dict, out_path: Path, checkpoint=None) -> None:
    """Three-row repertoire view per algorithm: a representative run, the
    number of runs occupying each cell, and the mean best fitness per cell."""
    algorithms = sorted(runsets)
    fig, axes = plt.subplots(
        3, len(algorithms), figsize=(4.0 * len(algorithms), 9.5), squeeze=False
    )
    for col, algorithm in enumerate(algorithms):
        runset = runsets[algorithm]
        eta = runset.eta
        frames = _checkpoint_frames(runset, checkpoint)
        grids = np.stack([archive_grid(frame, eta) for frame in frames])

        rep = representative_index(
            [float(frame["fitness"].max()) if len(frame) else 0.0 for frame in frames]
        )
        counts = np.sum(~np.isnan(grids), axis=0)
        mean_best = np.where(counts > 0, np.nansum(grids, axis=0) / np.maximum(counts, 1),
                             np.nan)
        occupancy = counts.astype(float)
        occupancy[occupancy == 0.0] = np.nan

        titles = (
            f"{algorithm}: run seed {runset.runs[rep].seed}",
            "runs occupying cell",
            "mean best fitness",
        )
        for row, (grid, title) in enumerate(zip((grids[rep], occupancy, mean_best), titles)):
            ax = axes[row][col]
            image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
            ax.set_title(title, fontsize=9)
            ax.set_xlabel("non-movable modules")
            ax.set_ylabel("joint modules")
            fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    _save(fig, out_path)


def module_distribution(runsets: dict, out_path: Path) -> None:
    """Normalized module-count distributions over time, one row per
    algorithm: total size, brick count and joint count."""
    algorithms = sorted(runsets)
    columns = ("total_modules", "bricks", "joints")
    fig, axes = plt.subplots(
        len(algorithms), 3, figsize=(12, 3.0 * len(algorithms)), squeeze=False
    )
    for row, algorithm in enumerate(algorithms):
        runset = runsets[algorithm]
        for col, column in enumerate(columns):
            generations, values, matrix = normalized_distribution(runset, column)
            ax = axes[row][col]
            ax.imshow(
                matrix,
                origin="lower",
                aspect="auto",
                cmap="magma",
                extent=(generations[0], generations[-1], values[0], values[-1] + 1),
            )
            ax.set_title(f"{algorithm}: {column.replace('_', ' ')}", fontsize=9)
            ax.set_xlabel("generation")
            ax.set_ylabel("count")
    fig.tight_layout()
    _save(fig, out_path)
