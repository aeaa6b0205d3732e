"""Evolving morphology and control of simulated modular robots.

Compares a single-objective EA, NSGA-II with morphological-diversity
objectives, and MAP-Elites on a locomotion task, using a deterministic
kinematic surrogate simulator. See README for the CLI and file formats.
"""

__version__ = "0.1.0"

from .genome import (
    ControllerGenes,
    Descriptor,
    Genome,
    GenomeFormatError,
    ModuleKind,
    MorphLimits,
    MorphNode,
    deserialize,
    random_genome,
    serialize,
)
from .phenotype import Phenotype, SimConfig, SimResult, build_phenotype, evaluate, simulate
from .search import (
    ALGORITHMS,
    AlgoConfig,
    Archive,
    Individual,
    MapElites,
    Nsga2,
    SingleObjectiveEA,
    archive_insert,
    feasible_cell_count,
)
from .variation import VariationConfig, bounce_back, crossover, mutate_controllers, mutate_morphology
from .metrics import RunRecorder, coverage, module_histogram, qd_score
from .runner import ConfigError, ExperimentConfig, SweepSpec, replay, run, sweep

__all__ = [
    "ALGORITHMS",
    "AlgoConfig",
    "Archive",
    "ConfigError",
    "ControllerGenes",
    "Descriptor",
    "ExperimentConfig",
    "Genome",
    "GenomeFormatError",
    "Individual",
    "MapElites",
    "ModuleKind",
    "MorphLimits",
    "MorphNode",
    "Nsga2",
    "Phenotype",
    "RunRecorder",
    "SimConfig",
    "SimResult",
    "SingleObjectiveEA",
    "SweepSpec",
    "VariationConfig",
    "archive_insert",
    "bounce_back",
    "build_phenotype",
    "coverage",
    "crossover",
    "deserialize",
    "evaluate",
    "feasible_cell_count",
    "module_histogram",
    "mutate_controllers",
    "mutate_morphology",
    "qd_score",
    "random_genome",
    "replay",
    "run",
    "serialize",
    "simulate",
    "sweep",
]
