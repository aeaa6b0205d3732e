"""Experiment orchestration: configuration, seeding, repetitions, the
parameter sweep, and all file outputs.

Every run is fully determined by (config, seed): per-repetition seeds are
seed, seed+1, ...; within a run one root stream is split into init,
selection and variation streams so the draw sequences cannot shift when
unrelated code changes. Floats are written with shortest round-trip repr, so
identical configs reproduce byte-identical files and dumped fitness values
re-parse exactly.
"""

from __future__ import annotations

import csv
import itertools
import json
import statistics
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .genome import Genome, GenomeFormatError, MorphLimits, deserialize, serialize
from .metrics import RunRecorder
from .phenotype import SimConfig, build_phenotype, evaluate, simulate
from .search import ALGORITHMS, AlgoConfig, Archive, Nsga2
from .variation import VariationConfig

MANIFEST_SCHEMA = "evomod-manifest/1"

STATS_COLUMNS = ("generation", "evaluations", "max_fitness", "qd_score", "coverage")
ARCHIVE_COLUMNS = ("m", "j", "fitness", "genome")
HISTOGRAM_COLUMNS = ("generation", "total_modules", "bricks", "joints", "count")

VARIATION_DEFAULTS = {
    "ea": VariationConfig(p_morph=0.2, p_cross=0.2, p_ctrl=0.2, sigma=0.05),
    "nsga2": VariationConfig(p_morph=0.05, p_cross=0.1, p_ctrl=0.2, sigma=0.1),
    "map_elites": VariationConfig(p_morph=0.2, p_cross=0.2, p_ctrl=0.1, sigma=0.1),
}

MAP_ELITES_INIT_DEFAULT = 1000

# Pre-experiment parameter-search grids (three values per knob).
SWEEP_GRID_DEFAULTS = {
    "p_morph": (0.05, 0.1, 0.2),
    "p_cross": (0.05, 0.1, 0.2),
    "p_ctrl": (0.05, 0.1, 0.2),
    "sigma": (0.01, 0.05, 0.1),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending fields."""


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "ea"
    seed: int = 1
    repetitions: int = 30
    generations: int = 500
    population: int = 200
    init_size: Optional[int] = None  # default: population; 1000 for MAP-Elites
    variation: Optional[VariationConfig] = None  # default per algorithm
    limits: MorphLimits = MorphLimits()
    sim: SimConfig = SimConfig()
    out_dir: str = "runs"
    strict_budget: bool = False
    diversity_recompute: str = "per_pool"
    dump_checkpoints: tuple = ()


@dataclass(frozen=True)
class ResolvedConfig:
    """ExperimentConfig with all per-algorithm defaults filled in."""

    algorithm: str
    seed: int
    repetitions: int
    generations: int
    population: int
    init_size: int
    variation: VariationConfig
    limits: MorphLimits
    sim: SimConfig
    out_dir: str
    strict_budget: bool
    diversity_recompute: str
    dump_checkpoints: tuple


def resolve_config(config: ExperimentConfig) -> ResolvedConfig:
    """Fill defaults and validate; raises ConfigError naming bad fields."""
    problems = []
    if config.algorithm not in ALGORITHMS:
        problems.append(f"algorithm: unknown {config.algorithm!r}, expected one of "
                        f"{sorted(ALGORITHMS)}")
    if config.seed < 0:
        problems.append(f"seed: must be >= 0, got {config.seed}")
    if config.repetitions < 1:
        problems.append(f"repetitions: must be >= 1, got {config.repetitions}")
    if config.generations < 0:
        problems.append(f"generations: must be >= 0, got {config.generations}")
    if config.population < 1:
        problems.append(f"population: must be >= 1, got {config.population}")
    if config.init_size is not None and config.init_size < 1:
        problems.append(f"init_size: must be >= 1, got {config.init_size}")
    if config.diversity_recompute not in ("per_pool", "per_removal"):
        problems.append(
            f"diversity_recompute: unknown {config.diversity_recompute!r}"
        )
    if any(g < 0 for g in config.dump_checkpoints):
        problems.append(f"dump_checkpoints: negative generation in {config.dump_checkpoints}")
    if problems:
        raise ConfigError("invalid configuration: " + "; ".join(problems))

    if config.init_size is not None:
        init_size = config.init_size
    elif config.algorithm == "map_elites":
        init_size = MAP_ELITES_INIT_DEFAULT
    else:
        init_size = config.population
    if config.algorithm in ("ea", "nsga2") and init_size != config.population:
        raise ConfigError(
            "invalid configuration: init_size: must equal population for "
            f"{config.algorithm} ({init_size} != {config.population})"
        )

    generations = config.generations
    if config.strict_budget:
        # Count initialization inside the evaluation budget.
        generations = max(
            (config.generations * config.population - init_size) // config.population, 0
        )

    return ResolvedConfig(
        algorithm=config.algorithm,
        seed=config.seed,
        repetitions=config.repetitions,
        generations=generations,
        population=config.population,
        init_size=init_size,
        variation=config.variation or VARIATION_DEFAULTS[config.algorithm],
        limits=config.limits,
        sim=config.sim,
        out_dir=config.out_dir,
        strict_budget=config.strict_budget,
        diversity_recompute=config.diversity_recompute,
        dump_checkpoints=tuple(sorted(set(config.dump_checkpoints))),
    )


def _build_algorithm(resolved: ResolvedConfig):
    algo_cfg = AlgoConfig(
        population=resolved.population,
        init_size=resolved.init_size,
        generations=resolved.generations,
    )

    def evaluate_fn(genome: Genome) -> tuple:
        return evaluate(genome, resolved.limits, resolved.sim)

    cls = ALGORITHMS[resolved.algorithm]
    if cls is Nsga2:
        return cls(evaluate_fn, algo_cfg, resolved.variation, resolved.limits,
                   diversity_recompute=resolved.diversity_recompute)
    return cls(evaluate_fn, algo_cfg, resolved.variation, resolved.limits)


def execute_run(resolved: ResolvedConfig, run_seed: int, on_generation=None) -> RunRecorder:
    """One repetition, in memory. `on_generation(gen, recorder, algo)` is
    invoked after every recorded generation (checkpoint dumps hook in here)."""
    root = np.random.default_rng(run_seed)
    init_rng, selection_rng, variation_rng = root.spawn(3)
    algo = _build_algorithm(resolved)
    recorder = RunRecorder(resolved.limits.eta)

    newly = algo.initialize(init_rng)
    recorder.record_generation(0, newly, algo.census())
    if on_generation:
        on_generation(0, recorder, algo)
    for gen in range(1, resolved.generations + 1):
        newly = algo.step(selection_rng, variation_rng)
        recorder.record_generation(gen, newly, algo.census())
        if on_generation:
            on_generation(gen, recorder, algo)
    return recorder


# ---------------------------------------------------------------------------
# File outputs
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _write_csv(path: Path, header: tuple, rows: list) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_stats_csv(path: Path, recorder: RunRecorder) -> None:
    rows = [
        (s.generation, s.evaluations, s.max_fitness, s.qd_score, s.coverage)
        for s in recorder.history
    ]
    _write_csv(path, STATS_COLUMNS, rows)


def write_histogram_csv(path: Path, recorder: RunRecorder) -> None:
    rows = []
    for s in recorder.history:
        for key in sorted(s.module_histogram):
            total, bricks, joints = key
            rows.append((s.generation, total, bricks, joints, s.module_histogram[key]))
    _write_csv(path, HISTOGRAM_COLUMNS, rows)


def write_archive_csv(path: Path, archive: Archive) -> None:
    rows = [
        (ind.descriptor.m, ind.descriptor.j, ind.fitness, serialize(ind.genome))
        for ind in archive.elites()
    ]
    _write_csv(path, ARCHIVE_COLUMNS, rows)


def read_archive_csv(path: Path) -> list:
    """Rows of (m, j, fitness, genome) from a dump, parsed back."""
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(
                (
                    int(row["m"]),
                    int(row["j"]),
                    float(row["fitness"]),
                    deserialize(row["genome"]),
                )
            )
    return out


def _manifest_dict(resolved: ResolvedConfig, run_seed: int, files: dict) -> dict:
    config_echo = asdict(resolved)
    config_echo["dump_checkpoints"] = list(resolved.dump_checkpoints)
    return {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "algorithm": resolved.algorithm,
        "run_seed": run_seed,
        "config": config_echo,
        "files": files,
    }


@dataclass
class RunPaths:
    algorithm: str
    seed: int
    stats: Path
    archive: Path
    histogram: Path
    manifest: Path
    checkpoints: dict = field(default_factory=dict)


def run(config: ExperimentConfig) -> list:
    """Execute `repetitions` independent runs and write their artifacts.

    Each repetition writes a stats CSV, a final projection/archive dump, a
    module histogram CSV and a manifest echoing the resolved configuration.
    """
    resolved = resolve_config(config)
    out = Path(resolved.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for rep in range(resolved.repetitions):
        run_seed = resolved.seed + rep
        prefix = f"{resolved.algorithm}_s{run_seed}"
        paths = RunPaths(
            algorithm=resolved.algorithm,
            seed=run_seed,
            stats=out / f"{prefix}_stats.csv",
            archive=out / f"{prefix}_archive.csv",
            histogram=out / f"{prefix}_hist.csv",
            manifest=out / f"{prefix}_manifest.json",
        )

        def on_generation(gen, recorder, algo):
            if gen in resolved.dump_checkpoints:
                snap = out / f"{prefix}_archive_g{gen}.csv"
                write_archive_csv(snap, recorder.projection)
                paths.checkpoints[gen] = snap

        recorder = execute_run(resolved, run_seed, on_generation=on_generation)
        write_stats_csv(paths.stats, recorder)
        write_histogram_csv(paths.histogram, recorder)
        write_archive_csv(paths.archive, recorder.projection)
        files = {
            "stats": paths.stats.name,
            "archive": paths.archive.name,
            "histogram": paths.histogram.name,
            "checkpoints": {str(g): p.name for g, p in sorted(paths.checkpoints.items())},
        }
        paths.manifest.write_text(
            json.dumps(_manifest_dict(resolved, run_seed, files), indent=2, sort_keys=True)
            + "\n"
        )
        results.append(paths)
    return results


# ---------------------------------------------------------------------------
# Parameter sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    p_morph: tuple = SWEEP_GRID_DEFAULTS["p_morph"]
    p_cross: tuple = SWEEP_GRID_DEFAULTS["p_cross"]
    p_ctrl: tuple = SWEEP_GRID_DEFAULTS["p_ctrl"]
    sigma: tuple = SWEEP_GRID_DEFAULTS["sigma"]

    def __post_init__(self) -> None:
        for name in ("p_morph", "p_cross", "p_ctrl", "sigma"):
            if not getattr(self, name):
                raise ConfigError(f"invalid sweep: {name}: empty value grid")

    def combinations(self) -> list:
        return list(
            itertools.product(self.p_morph, self.p_cross, self.p_ctrl, self.sigma)
        )


def sweep(spec: SweepSpec, base: ExperimentConfig, repetitions: int = 5) -> Path:
    """Run every rate combination for every algorithm and rank by median
    final max fitness. All combinations share the same seed list, so
    comparisons are paired. Returns the ranking CSV path."""
    out = Path(base.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for algorithm in sorted(ALGORITHMS):
        for p_morph, p_cross, p_ctrl, sigma in spec.combinations():
            cfg = replace(
                base,
                algorithm=algorithm,
                repetitions=repetitions,
                variation=VariationConfig(
                    p_morph=p_morph, p_cross=p_cross, p_ctrl=p_ctrl, sigma=sigma
                ),
            )
            resolved = resolve_config(cfg)
            finals = []
            for rep in range(repetitions):
                recorder = execute_run(resolved, resolved.seed + rep)
                finals.append(recorder.history[-1].max_fitness)
            rows.append(
                {
                    "algorithm": algorithm,
                    "p_morph": p_morph,
                    "p_cross": p_cross,
                    "p_ctrl": p_ctrl,
                    "sigma": sigma,
                    "median_final_max_fitness": statistics.median(finals),
                }
            )

    rows.sort(key=lambda r: (r["algorithm"], -r["median_final_max_fitness"]))
    ranking_path = out / "sweep_ranking.csv"
    header = ("algorithm", "p_morph", "p_cross", "p_ctrl", "sigma",
              "median_final_max_fitness")
    _write_csv(ranking_path, header, [[r[c] for c in header] for r in rows])

    winners = {}
    for row in rows:  # rows are sorted best-first within each algorithm
        winners.setdefault(row["algorithm"], row)
    (out / "sweep_winners.json").write_text(
        json.dumps(winners, indent=2, sort_keys=True) + "\n"
    )
    return ranking_path


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


def replay(
    genome_path: Path,
    limits: MorphLimits,
    sim: SimConfig,
    trajectory_path: Optional[Path] = None,
) -> tuple:
    """Re-evaluate one serialized genome; optionally dump the root trajectory.

    Returns (fitness, descriptor). Raises GenomeFormatError on bad input.
    """
    path = Path(genome_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GenomeFormatError(f"cannot read genome file {path}: {exc}") from exc
    genome = deserialize(text)
    phen = build_phenotype(genome, limits)
    result = simulate(phen, sim, record_trajectory=True)
    if trajectory_path is not None:
        rows = [
            (int(step), x, y, z) for step, x, y, z in result.trajectory
        ]
        _write_csv(Path(trajectory_path), ("step", "x", "y", "z"), rows)
    return result.fitness, phen.descriptor
