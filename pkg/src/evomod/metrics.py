"""Run metrics: cumulative descriptor-grid projection, QD-score, coverage,
max fitness and module-distribution histograms.

The projection is an archive maintained over the whole run, independent of
the algorithm's own population: every evaluated individual is inserted as it
appears, so a solution can outlive its time in the population. QD-score and
coverage are therefore monotone non-decreasing for every algorithm.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .search import Archive, feasible_cell_count


def qd_score(projection: Archive) -> float:
    """Sum of elite fitness over occupied cells."""
    return sum(ind.fitness for ind in projection.cells.values())


def coverage(projection: Archive) -> float:
    """Occupied cells divided by the feasible (m >= 1, m + j <= eta) count."""
    return len(projection) / feasible_cell_count(projection.eta)


def module_histogram(individuals: list) -> Counter:
    """Counts of (total module count, brick count, joint count)."""
    return Counter(
        (ind.descriptor.m + ind.descriptor.j, ind.descriptor.m, ind.descriptor.j)
        for ind in individuals
    )


@dataclass
class GenerationStats:
    generation: int
    evaluations: int
    max_fitness: float
    qd_score: float
    coverage: float
    module_histogram: Counter


class RunRecorder:
    """Accumulates the projection and per-generation stats rows for one run."""

    def __init__(self, eta: int):
        self.projection = Archive(eta)
        self.evaluations = 0
        self.max_fitness = 0.0
        self.history: list = []

    def record_generation(
        self, generation: int, newly_evaluated: list, census: list
    ) -> GenerationStats:
        """Insert the generation's evaluations, then emit the stats row.

        `census` is the algorithm's current population (EA, NSGA-II) or its
        archive elites (MAP-Elites); it feeds the module histogram.
        """
        for ind in newly_evaluated:
            self.projection.insert(ind)
            if ind.fitness > self.max_fitness:
                self.max_fitness = ind.fitness
        self.evaluations += len(newly_evaluated)
        stats = GenerationStats(
            generation=generation,
            evaluations=self.evaluations,
            max_fitness=self.max_fitness,
            qd_score=qd_score(self.projection),
            coverage=coverage(self.projection),
            module_histogram=module_histogram(census),
        )
        self.history.append(stats)
        return stats
