"""Run-directory discovery and loading.

Consumes the runner's documented artifacts only: per-run manifests
(`*_manifest.json`) naming the stats, histogram and archive CSV files, plus
optional per-generation archive checkpoint dumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json

import pandas as pd

STATS_COLUMNS = ["generation", "evaluations", "max_fitness", "qd_score", "coverage"]
HISTOGRAM_COLUMNS = ["generation", "total_modules", "bricks", "joints", "count"]
ARCHIVE_COLUMNS = ["m", "j", "fitness", "genome"]


class AnalysisError(ValueError):
    """Raised for unusable or inconsistent run directories."""


@dataclass
class RunData:
    seed: int
    eta: int
    stats: pd.DataFrame
    histogram: pd.DataFrame
    archive: pd.DataFrame
    checkpoints: dict = field(default_factory=dict)  # generation -> archive frame


@dataclass
class RunSet:
    """All repetitions of one algorithm, column-schema checked."""

    algorithm: str
    runs: list

    @property
    def seeds(self) -> list:
        return [run.seed for run in self.runs]

    @property
    def eta(self) -> int:
        return self.runs[0].eta

    def final_max_fitness(self) -> list:
        return [float(run.stats["max_fitness"].iloc[-1]) for run in self.runs]

    def final_metric(self, column: str) -> list:
        return [float(run.stats[column].iloc[-1]) for run in self.runs]


def _read_csv(path: Path, expected_columns: list) -> pd.DataFrame:
    frame = pd.read_csv(path)
    if list(frame.columns) != expected_columns:
        raise AnalysisError(
            f"{path.name}: expected columns {expected_columns}, got {list(frame.columns)}"
        )
    return frame


def load_run_directory(root: Path) -> dict:
    """All run sets under `root` (searched recursively), keyed by algorithm."""
    root = Path(root)
    manifests = sorted(root.rglob("*_manifest.json"))
    if not manifests:
        raise AnalysisError(f"no run manifests found under {root}")
    by_algorithm: dict = {}
    for manifest_path in manifests:
        manifest = json.loads(manifest_path.read_text())
        algorithm = manifest["algorithm"]
        base = manifest_path.parent
        files = manifest["files"]
        checkpoints = {
            int(gen): _read_csv(base / name, ARCHIVE_COLUMNS)
            for gen, name in files.get("checkpoints", {}).items()
        }
        run = RunData(
            seed=int(manifest["run_seed"]),
            eta=int(manifest["config"]["limits"]["eta"]),
            stats=_read_csv(base / files["stats"], STATS_COLUMNS),
            histogram=_read_csv(base / files["histogram"], HISTOGRAM_COLUMNS),
            archive=_read_csv(base / files["archive"], ARCHIVE_COLUMNS),
            checkpoints=checkpoints,
        )
        by_algorithm.setdefault(algorithm, []).append(run)

    runsets = {}
    for algorithm, runs in by_algorithm.items():
        runs.sort(key=lambda r: r.seed)
        lengths = {len(run.stats) for run in runs}
        if len(lengths) != 1:
            raise AnalysisError(
                f"{algorithm}: mismatched generation counts across repetitions: "
                f"{sorted(lengths)}"
            )
        runsets[algorithm] = RunSet(algorithm=algorithm, runs=runs)
    return runsets
