"""The `analyze` command: read a run directory, emit figures and summaries."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import pandas as pd

from .figures import fitness_curves, metric_curves, module_distribution, projection_heatmaps
from .loading import AnalysisError, load_run_directory
from .stats import pairwise_tests

TESTED_METRICS = ("max_fitness", "qd_score", "coverage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="analyze",
        description="Produce figures and statistical tests from evomod run output.",
    )
    parser.add_argument("--in", dest="in_dir", required=True, help="run directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="output directory")
    parser.add_argument(
        "--checkpoints",
        help="comma-separated generations with archive checkpoint dumps "
        "(a heatmap figure is emitted per checkpoint, plus the final one)",
    )
    return parser


def analyze(in_dir: Path, out_dir: Path, checkpoints=()) -> dict:
    """Run the full pipeline; returns {figure/table name: path}."""
    runsets = load_run_directory(Path(in_dir))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = {}

    summary = fitness_curves(runsets, out / "fitness_curves.png")
    outputs["fitness_curves"] = out / "fitness_curves.png"
    metric_curves(runsets, "qd_score", "QD-score", out / "qd_score.png")
    outputs["qd_score"] = out / "qd_score.png"
    metric_curves(runsets, "coverage", "coverage", out / "coverage.png")
    outputs["coverage"] = out / "coverage.png"

    projection_heatmaps(runsets, out / "heatmap_final.png")
    outputs["heatmap_final"] = out / "heatmap_final.png"
    for generation in checkpoints:
        path = out / f"heatmap_g{generation}.png"
        projection_heatmaps(runsets, path, checkpoint=generation)
        outputs[f"heatmap_g{generation}"] = path

    module_distribution(runsets, out / "module_distribution.png")
    outputs["module_distribution"] = out / "module_distribution.png"

    # summary table: final metrics per algorithm
    rows = []
    for algorithm, runset in sorted(runsets.items()):
        entry = {"algorithm": algorithm, "repetitions": len(runset.runs)}
        for metric in TESTED_METRICS:
            finals = runset.final_metric(metric)
            entry[f"{metric}_mean"] = sum(finals) / len(finals)
            entry[f"{metric}_median"] = sorted(finals)[len(finals) // 2]
        rows.append(entry)
    summary_path = out / "summary.csv"
    pd.DataFrame(rows).merge(summary, on="algorithm", how="left").to_csv(
        summary_path, index=False
    )
    outputs["summary"] = summary_path

    # pairwise rank-sum tests (Holm-adjusted) and Fligner-Killeen, per metric
    test_rows = []
    if all(len(runset.runs) >= 5 for runset in runsets.values()) and len(runsets) >= 2:
        for metric in TESTED_METRICS:
            groups = {
                algorithm: runset.final_metric(metric)
                for algorithm, runset in sorted(runsets.items())
            }
            result = pairwise_tests(groups)
            for a, b, raw, adjusted in result.pairs:
                test_rows.append(
                    {
                        "metric": metric,
                        "group_a": a,
                        "group_b": b,
                        "p_raw": raw,
                        "p_holm": adjusted,
                        "fligner_p": result.fligner_p,
                        "degenerate": result.degenerate,
                    }
                )
    tests_path = out / "pairwise_tests.csv"
    pd.DataFrame(test_rows).to_csv(tests_path, index=False)
    outputs["pairwise_tests"] = tests_path
    return outputs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    checkpoints = []
    if args.checkpoints:
        try:
            checkpoints = [int(g) for g in args.checkpoints.split(",")]
        except ValueError:
            print(f"error: bad --checkpoints value: {args.checkpoints}", file=sys.stderr)
            return 2
    try:
        outputs = analyze(Path(args.in_dir), Path(args.out_dir), checkpoints)
    except (AnalysisError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, path in outputs.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
