"""Figure data shaping and rendering."""

import numpy as np
import pytest

from analysis_helpers import simple_stats, write_run, write_three_algorithm_dir
from evomod_analysis.cli import analyze, main
from evomod_analysis.figures import (
    archive_grid,
    fitness_curves,
    metric_band,
    module_distribution,
    normalized_distribution,
    projection_heatmaps,
)
from evomod_analysis.loading import AnalysisError, load_run_directory


@pytest.fixture()
def runsets(tmp_path):
    write_three_algorithm_dir(tmp_path / "runs", repetitions=5, generations=4)
    return load_run_directory(tmp_path / "runs")


def test_metric_band_constant_series_zero_ci(tmp_path):
    rows = [(g, 10 * (g + 1), 1.0, 1.0, 0.5) for g in range(4)]
    for seed in (1, 2, 3):
        write_run(tmp_path, "ea", seed, rows)
    runset = load_run_directory(tmp_path)["ea"]
    band = metric_band(runset, "max_fitness")
    assert np.all(band["mean"] == 1.0)
    assert np.all(band["ci_half"] == 0.0)


def test_metric_band_ci_matches_hand_computation(tmp_path):
    for seed, fitness in ((1, 1.0), (2, 2.0), (3, 3.0)):
        write_run(tmp_path, "ea", seed, [(0, 10, fitness, 0.0, 0.0)])
    band = metric_band(load_run_directory(tmp_path)["ea"], "max_fitness")
    assert band["mean"].iloc[0] == pytest.approx(2.0)
    assert band["ci_half"].iloc[0] == pytest.approx(1.96 / np.sqrt(3), abs=1e-12)


def test_normalized_distribution_columns_sum_to_one(runsets):
    for runset in runsets.values():
        for column in ("total_modules", "bricks", "joints"):
            _, _, matrix = normalized_distribution(runset, column)
            assert np.all(np.abs(matrix.sum(axis=0) - 1.0) <= 1e-12)


def test_normalized_distribution_vanish_and_reappear(tmp_path):
    # a size-3 band present, vanishing, then re-appearing over generations
    hist = [
        (0, 3, 2, 1, 4), (0, 2, 1, 1, 4),
        (1, 2, 1, 1, 8),
        (2, 3, 2, 1, 2), (2, 2, 1, 1, 6),
    ]
    write_run(tmp_path, "ea", 1, simple_stats(2), histogram_rows=hist)
    runset = load_run_directory(tmp_path)["ea"]
    generations, values, matrix = normalized_distribution(runset, "total_modules")
    band = matrix[list(values).index(3)]
    assert band[0] == pytest.approx(0.5)
    assert band[1] == 0.0
    assert band[2] == pytest.approx(0.25)


def test_normalized_distribution_flags_zero_population_column(tmp_path):
    hist = [(0, 2, 1, 1, 4), (1, 2, 1, 1, 0), (2, 2, 1, 1, 4)]
    write_run(tmp_path, "ea", 1, simple_stats(2), histogram_rows=hist)
    runset = load_run_directory(tmp_path)["ea"]
    with pytest.raises(AnalysisError, match=r"zero-population.*\[1\]"):
        normalized_distribution(runset, "total_modules")


def test_archive_grid_occupancy_and_means(tmp_path):
    write_run(tmp_path, "ea", 1, simple_stats(1),
              archive_rows=[(1, 0, 1.0, "{}"), (2, 1, 3.0, "{}")])
    write_run(tmp_path, "ea", 2, simple_stats(1),
              archive_rows=[(1, 0, 2.0, "{}")])
    runset = load_run_directory(tmp_path)["ea"]
    grids = np.stack([archive_grid(run.archive, 20) for run in runset.runs])
    occupancy = np.sum(~np.isnan(grids), axis=0)
    assert occupancy[0, 1] == 2  # cell (m=1, j=0) occupied by both runs
    assert occupancy[1, 2] == 1
    assert occupancy.max() <= len(runset.runs)
    mean_best = np.where(occupancy > 0,
                         np.nansum(grids, axis=0) / np.maximum(occupancy, 1), np.nan)
    assert mean_best[0, 1] == pytest.approx(1.5)  # arithmetic mean over runs
    assert mean_best[1, 2] == pytest.approx(3.0)


def test_fitness_curves_writes_figure_and_summary(runsets, tmp_path):
    out = tmp_path / "fig.png"
    summary = fitness_curves(runsets, out)
    assert out.exists() and out.stat().st_size > 0
    assert set(summary["algorithm"]) == {"ea", "nsga2", "map_elites"}
    assert {"final_mean", "final_std", "final_median"} <= set(summary.columns)


def test_figures_regenerate_byte_identically(runsets, tmp_path):
    first, second = tmp_path / "a.png", tmp_path / "b.png"
    fitness_curves(runsets, first)
    fitness_curves(runsets, second)
    assert first.read_bytes() == second.read_bytes()


def test_projection_heatmap_missing_checkpoint_reported(runsets, tmp_path):
    with pytest.raises(AnalysisError, match="checkpoint generation 2"):
        projection_heatmaps(runsets, tmp_path / "h.png", checkpoint=2)


def test_projection_heatmap_with_checkpoints(tmp_path):
    for seed in (1, 2):
        write_run(tmp_path / "runs", "ea", seed, simple_stats(3),
                  checkpoint_dumps={2: [(1, 0, 0.5 * seed, "{}")]})
    runsets = load_run_directory(tmp_path / "runs")
    out = tmp_path / "h.png"
    projection_heatmaps(runsets, out, checkpoint=2)
    assert out.exists()


def test_module_distribution_figure(runsets, tmp_path):
    out = tmp_path / "m.png"
    module_distribution(runsets, out)
    assert out.exists() and out.stat().st_size > 0


def test_analyze_pipeline_end_to_end(tmp_path, capsys):
    write_three_algorithm_dir(tmp_path / "runs", repetitions=5, generations=4)
    code = main(["--in", str(tmp_path / "runs"), "--out", str(tmp_path / "out")])
    assert code == 0
    for name in ("fitness_curves.png", "qd_score.png", "coverage.png",
                 "heatmap_final.png", "module_distribution.png",
                 "summary.csv", "pairwise_tests.csv"):
        assert (tmp_path / "out" / name).exists(), name
    assert "fitness_curves" in capsys.readouterr().out


def test_analyze_missing_input_reports_error(tmp_path, capsys):
    code = main(["--in", str(tmp_path / "none"), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_analyze_rejects_bad_checkpoints_value(tmp_path, capsys):
    code = main(["--in", str(tmp_path), "--out", str(tmp_path), "--checkpoints", "x"])
    assert code == 2
    assert "checkpoints" in capsys.readouterr().err
