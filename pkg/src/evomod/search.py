"""The three search algorithms behind one interface.

SingleObjectiveEA: (lambda, mu) generational replacement with binary
tournaments on fitness. Nsga2: NSGA-II over three maximized objectives,
fitness plus two population-relative morphological diversity scores.
MapElites: uniform parent selection from a descriptor-indexed archive of
elites.

Each algorithm exposes initialize(rng) and step(selection_rng, variation_rng),
both returning the individuals evaluated by that call, and census() with the
current population (EA, NSGA-II) or archive elites (MAP-Elites). Evaluation is
injected as a callable genome -> (fitness, descriptor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .genome import Descriptor, Genome, MorphLimits, random_genome
from .variation import VariationConfig, vary_batch

EvaluateFn = Callable[[Genome], tuple]


@dataclass
class Individual:
    genome: Genome
    fitness: float
    descriptor: Descriptor
    diversity: Optional[tuple] = None  # (d_m, d_j), NSGA-II only
    rank: Optional[int] = None
    crowding: Optional[float] = None

    @property
    def objectives(self) -> tuple:
        return (self.fitness,) + self.diversity


@dataclass(frozen=True)
class AlgoConfig:
    population: int = 200  # population and per-generation batch size
    init_size: int = 200  # 1000 for MAP-Elites
    generations: int = 500
    tournament_size: int = 2

    def __post_init__(self) -> None:
        for name in ("population", "init_size", "tournament_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")


def feasible_cell_count(eta: int) -> int:
    """Number of reachable descriptor cells: m >= 1, j >= 0, m + j <= eta."""
    return eta * (eta + 1) // 2


class Archive:
    """Descriptor-indexed grid keeping the best-known individual per cell.

    Replacement requires a strict fitness improvement, so the first-found
    elite survives ties and cell fitness is monotone non-decreasing.
    """

    def __init__(self, eta: int):
        self.eta = eta
        self.cells: dict = {}

    def is_feasible(self, d: Descriptor) -> bool:
        return d.m >= 1 and d.j >= 0 and d.m + d.j <= self.eta

    def insert(self, ind: Individual) -> bool:
        d = Descriptor(*ind.descriptor)
        if not self.is_feasible(d):
            raise ValueError(
                f"infeasible descriptor {tuple(d)} for eta={self.eta}: "
                "phenotype construction bug"
            )
        incumbent = self.cells.get(d)
        if incumbent is None or ind.fitness > incumbent.fitness:
            self.cells[d] = ind
            return True
        return False

    def elites(self) -> list:
        """Occupants in deterministic (m, j) cell order."""
        return [self.cells[key] for key in sorted(self.cells)]

    def __len__(self) -> int:
        return len(self.cells)


def archive_insert(archive: Archive, ind: Individual) -> bool:
    return archive.insert(ind)


# ---------------------------------------------------------------------------
# NSGA-II machinery
# ---------------------------------------------------------------------------


def dominates(a: tuple, b: tuple) -> bool:
    """Pareto dominance with all objectives maximized."""
    better = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            better = True
    return better


def nondominated_sort(objectives: list) -> list:
    """Partition indices into Pareto fronts (Deb's fast sort, O(M N^2))."""
    n = len(objectives)
    dominated_by = [[] for _ in range(n)]
    domination_count = [0] * n
    fronts = [[]]
    for p in range(n):
        for q in range(p + 1, n):
            if dominates(objectives[p], objectives[q]):
                dominated_by[p].append(q)
                domination_count[q] += 1
            elif dominates(objectives[q], objectives[p]):
                dominated_by[q].append(p)
                domination_count[p] += 1
    for p in range(n):
        if domination_count[p] == 0:
            fronts[0].append(p)
    current = 0
    while fronts[current]:
        nxt = []
        for p in fronts[current]:
            for q in dominated_by[p]:
                domination_count[q] -= 1
                if domination_count[q] == 0:
                    nxt.append(q)
        current += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(front_objectives: list) -> list:
    """Per-member crowding distance; boundary members get infinity."""
    size = len(front_objectives)
    if size == 0:
        return []
    if size <= 2:
        return [math.inf] * size
    n_obj = len(front_objectives[0])
    distance = [0.0] * size
    for m in range(n_obj):
        order = sorted(range(size), key=lambda i: front_objectives[i][m])
        lo = front_objectives[order[0]][m]
        hi = front_objectives[order[-1]][m]
        distance[order[0]] = math.inf
        distance[order[-1]] = math.inf
        if hi == lo:
            continue
        for k in range(1, size - 1):
            idx = order[k]
            if distance[idx] == math.inf:
                continue
            gap = front_objectives[order[k + 1]][m] - front_objectives[order[k - 1]][m]
            distance[idx] += gap / (hi - lo)
    return distance


def diversity_objectives(population: list) -> list:
    """Mean component-wise descriptor distance of each member to the pool.

    d(x, y) = (1 - exp(-|m_x - m_y|), 1 - exp(-|j_x - j_y|)), averaged over
    every member of the pool including x itself. Components lie in [0, 1).
    """
    m = np.array([ind.descriptor.m for ind in population], dtype=np.float64)
    j = np.array([ind.descriptor.j for ind in population], dtype=np.float64)
    d_m = (1.0 - np.exp(-np.abs(m[:, None] - m[None, :]))).mean(axis=1)
    d_j = (1.0 - np.exp(-np.abs(j[:, None] - j[None, :]))).mean(axis=1)
    return [(float(a), float(b)) for a, b in zip(d_m, d_j)]


# ---------------------------------------------------------------------------
# Algorithms
# ---------------------------------------------------------------------------


class _SearchBase:
    def __init__(
        self,
        evaluate_fn: EvaluateFn,
        algo: AlgoConfig,
        variation: VariationConfig,
        limits: MorphLimits,
    ):
        self.evaluate_fn = evaluate_fn
        self.algo = algo
        self.variation = variation
        self.limits = limits
        self.evaluations = 0

    def _evaluate_all(self, genomes: list) -> list:
        out = []
        for g in genomes:
            fitness, desc = self.evaluate_fn(g)
            out.append(Individual(genome=g, fitness=fitness, descriptor=desc))
        self.evaluations += len(genomes)
        return out

    def _random_batch(self, rng: np.random.Generator, size: int) -> list:
        return self._evaluate_all([random_genome(rng, self.limits) for _ in range(size)])


def _tournament_pick(
    pop: list, rng: np.random.Generator, size: int, better: Callable
) -> Individual:
    """k uniform picks with replacement; ties resolved uniformly."""
    contenders = [pop[int(i)] for i in rng.integers(len(pop), size=size)]
    best = [contenders[0]]
    for c in contenders[1:]:
        verdict = better(c, best[0])
        if verdict > 0:
            best = [c]
        elif verdict == 0:
            best.append(c)
    return best[int(rng.integers(len(best)))]


def _fitness_cmp(a: Individual, b: Individual) -> int:
    if a.fitness > b.fitness:
        return 1
    if a.fitness < b.fitness:
        return -1
    return 0


def _rank_crowding_cmp(a: Individual, b: Individual) -> int:
    if a.rank != b.rank:
        return 1 if a.rank < b.rank else -1
    if a.crowding != b.crowding:
        return 1 if a.crowding > b.crowding else -1
    return 0


class SingleObjectiveEA(_SearchBase):
    """(lambda, mu) comma strategy: offspring fully replace the population."""

    name = "ea"

    def __init__(self, evaluate_fn, algo, variation, limits):
        super().__init__(evaluate_fn, algo, variation, limits)
        if algo.init_size != algo.population:
            raise ValueError(
                "EA initial population must equal the population size "
                f"({algo.init_size} != {algo.population})"
            )
        self.population: list = []

    def initialize(self, rng: np.random.Generator) -> list:
        self.population = self._random_batch(rng, self.algo.init_size)
        return self.population

    def step(self, selection_rng, variation_rng) -> list:
        parents = [
            _tournament_pick(
                self.population, selection_rng, self.algo.tournament_size, _fitness_cmp
            ).genome
            for _ in range(self.algo.population)
        ]
        offspring = vary_batch(parents, variation_rng, self.variation)
        self.population = self._evaluate_all(offspring)
        return self.population

    def census(self) -> list:
        return self.population


class Nsga2(_SearchBase):
    """NSGA-II on (fitness, d_m, d_j), all maximized.

    Diversity objectives are population-relative, so they are recomputed
    over the parent+offspring union before survivor selection and again over
    the survivors (used by the next generation's tournaments). The
    diversity_recompute="per_removal" mode instead re-scores the shrinking
    pool after every single removal during truncation.
    """

    name = "nsga2"

    def __init__(
        self, evaluate_fn, algo, variation, limits, diversity_recompute: str = "per_pool"
    ):
        super().__init__(evaluate_fn, algo, variation, limits)
        if algo.init_size != algo.population:
            raise ValueError(
                "NSGA-II initial population must equal the population size "
                f"({algo.init_size} != {algo.population})"
            )
        if diversity_recompute not in ("per_pool", "per_removal"):
            raise ValueError(f"unknown diversity_recompute: {diversity_recompute!r}")
        self.diversity_recompute = diversity_recompute
        self.population: list = []

    def initialize(self, rng: np.random.Generator) -> list:
        self.population = self._random_batch(rng, self.algo.init_size)
        self._rescore(self.population)
        return self.population

    @staticmethod
    def _rescore(pool: list) -> list:
        """Refresh diversity, ranks and crowding over `pool`; returns the
        Pareto fronts as index lists."""
        for ind, div in zip(pool, diversity_objectives(pool)):
            ind.diversity = div
        objs = [ind.objectives for ind in pool]
        fronts = nondominated_sort(objs)
        for rank, front in enumerate(fronts):
            dists = crowding_distance([objs[i] for i in front])
            for i, dist in zip(front, dists):
                pool[i].rank = rank
                pool[i].crowding = dist
        return fronts

    def step(self, selection_rng, variation_rng) -> list:
        parents = [
            _tournament_pick(
                self.population,
                selection_rng,
                self.algo.tournament_size,
                _rank_crowding_cmp,
            ).genome
            for _ in range(self.algo.population)
        ]
        offspring = self._evaluate_all(vary_batch(parents, variation_rng, self.variation))
        union = self.population + offspring
        if self.diversity_recompute == "per_pool":
            survivors = self._truncate(union, self.algo.population)
        else:
            survivors = self._truncate_per_removal(union, self.algo.population)
        self._rescore(survivors)
        self.population = survivors
        return offspring

    @staticmethod
    def _truncate(pool: list, target: int) -> list:
        """Standard NSGA-II survivor selection over a freshly scored pool."""
        fronts = Nsga2._rescore(pool)
        survivors: list = []
        for front in fronts:
            if len(survivors) + len(front) <= target:
                survivors.extend(pool[i] for i in front)
                continue
            by_crowding = sorted(
                range(len(front)), key=lambda k: pool[front[k]].crowding, reverse=True
            )
            need = target - len(survivors)
            survivors.extend(pool[front[k]] for k in by_crowding[:need])
            break
        return survivors

    @staticmethod
    def _truncate_per_removal(pool: list, target: int) -> list:
        pool = list(pool)
        while len(pool) > target:
            last = Nsga2._rescore(pool)[-1]
            worst = min(range(len(last)), key=lambda k: (pool[last[k]].crowding, last[k]))
            pool.pop(last[worst])
        return pool

    def census(self) -> list:
        return self.population


class MapElites(_SearchBase):
    """Archive of per-cell elites with uniform parent selection."""

    name = "map_elites"

    def __init__(self, evaluate_fn, algo, variation, limits):
        super().__init__(evaluate_fn, algo, variation, limits)
        self.archive = Archive(limits.eta)

    def initialize(self, rng: np.random.Generator) -> list:
        seeded = self._random_batch(rng, self.algo.init_size)
        for ind in seeded:
            self.archive.insert(ind)
        return seeded

    def step(self, selection_rng, variation_rng) -> list:
        elites = self.archive.elites()
        picks = selection_rng.integers(len(elites), size=self.algo.population)
        parents = [elites[int(i)].genome for i in picks]
        offspring = self._evaluate_all(vary_batch(parents, variation_rng, self.variation))
        for ind in offspring:
            self.archive.insert(ind)
        return offspring

    def census(self) -> list:
        return self.archive.elites()


ALGORITHMS = {
    SingleObjectiveEA.name: SingleObjectiveEA,
    Nsga2.name: Nsga2,
    MapElites.name: MapElites,
}
