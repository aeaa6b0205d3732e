"""Search algorithms: tournaments, non-dominated sorting, crowding,
diversity objectives and the elites archive."""

import itertools
import math

import numpy as np
import pytest

from evomod.genome import Descriptor, Genome, MorphLimits, brick
from evomod.search import (
    AlgoConfig,
    Archive,
    Individual,
    MapElites,
    Nsga2,
    SingleObjectiveEA,
    _fitness_cmp,
    _tournament_pick,
    archive_insert,
    crowding_distance,
    diversity_objectives,
    dominates,
    feasible_cell_count,
    nondominated_sort,
)
from evomod.variation import VariationConfig

LIMITS = MorphLimits()
VAR = VariationConfig()


def make_individual(fitness=0.0, m=1, j=0, genome=None):
    return Individual(
        genome=genome or Genome(brick()), fitness=fitness, descriptor=Descriptor(m, j)
    )


def fake_evaluator(fitness=1.0, m=1, j=0):
    def evaluate_fn(genome):
        return fitness, Descriptor(m, j)

    return evaluate_fn


# ---------------------------------------------------------------------------
# tournaments
# ---------------------------------------------------------------------------


def test_tournament_uniform_on_equal_fitness():
    pop = [make_individual(fitness=1.0) for _ in range(10)]
    rng = np.random.default_rng(1)
    seen = {id(_tournament_pick(pop, rng, 2, _fitness_cmp)) for _ in range(2000)}
    assert len(seen) == 10  # every member can win


def test_tournament_best_selection_rate_matches_binomial_expectation():
    """With one winner among 200, a 2-way tournament (independent picks with
    replacement) selects it with probability 1 - (199/200)^2."""
    pop = [make_individual(fitness=0.0) for _ in range(200)]
    pop[37] = make_individual(fitness=10.0)
    rng = np.random.default_rng(2)
    trials = 100_000
    hits = sum(
        _tournament_pick(pop, rng, 2, _fitness_cmp) is pop[37] for _ in range(trials)
    )
    expected = 1.0 - (199 / 200) ** 2
    sigma = math.sqrt(expected * (1 - expected) / trials)
    assert abs(hits / trials - expected) < 4 * sigma


def test_ea_offspring_count_and_budget():
    algo = SingleObjectiveEA(fake_evaluator(), AlgoConfig(population=30, init_size=30),
                             VAR, LIMITS)
    rng = np.random.default_rng(3)
    sel, var = rng.spawn(2)
    algo.initialize(rng)
    for _ in range(4):
        newly = algo.step(sel, var)
        assert len(newly) == 30
    assert algo.evaluations == 30 * 5  # init + 4 generations


def test_ea_requires_init_equal_population():
    with pytest.raises(ValueError):
        SingleObjectiveEA(fake_evaluator(), AlgoConfig(population=10, init_size=20),
                          VAR, LIMITS)


def test_fitness_scaling_leaves_selection_decisions_unchanged():
    """Positive scaling never changes tournament winners, Pareto fronts or
    archive replacements (argmax/dominance invariance)."""
    rng_fit = np.random.default_rng(4)
    fits = rng_fit.uniform(0.0, 5.0, size=50)
    pop_a = [make_individual(fitness=float(f)) for f in fits]
    pop_b = [make_individual(fitness=float(3.7 * f)) for f in fits]
    picks_a = [pop_a.index(_tournament_pick(pop_a, np.random.default_rng(5), 2, _fitness_cmp))
               for _ in range(200)]
    picks_b = [pop_b.index(_tournament_pick(pop_b, np.random.default_rng(5), 2, _fitness_cmp))
               for _ in range(200)]
    assert picks_a == picks_b

    objs = [tuple(np.random.default_rng(6).uniform(0, 1, size=3)) for _ in range(40)]
    scaled = [tuple(3.7 * v for v in o) for o in objs]
    assert nondominated_sort(objs) == nondominated_sort(scaled)

    rng = np.random.default_rng(7)
    stream = [(int(rng.integers(1, 21)), float(rng.uniform(0, 10))) for _ in range(500)]
    decisions = []
    for scale in (1.0, 3.7):
        archive = Archive(eta=20)
        decisions.append(
            [archive_insert(archive, make_individual(fitness=scale * f, m=m, j=0))
             for m, f in stream]
        )
    assert decisions[0] == decisions[1]


# ---------------------------------------------------------------------------
# non-dominated sorting
# ---------------------------------------------------------------------------


def brute_force_fronts(objectives):
    """Dominance-matrix oracle: peel non-dominated layers one at a time."""
    remaining = list(range(len(objectives)))
    fronts = []
    while remaining:
        front = [
            p
            for p in remaining
            if not any(dominates(objectives[q], objectives[p]) for q in remaining)
        ]
        fronts.append(front)
        remaining = [p for p in remaining if p not in front]
    return fronts


def test_single_individual_single_front():
    assert nondominated_sort([(1.0, 2.0, 3.0)]) == [[0]]


def test_mutually_nondominated_unit_vectors():
    fronts = nondominated_sort([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert fronts == [[0, 1, 2]]


def test_dominance_definition():
    assert dominates((2, 2, 2), (1, 2, 2))
    assert not dominates((2, 2, 2), (2, 2, 2))
    assert not dominates((3, 0, 0), (0, 1, 0))


def test_nondominated_sort_matches_brute_force_oracle():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(1, 100))
        objs = [tuple(rng.integers(0, 5, size=3).tolist()) for _ in range(n)]
        got = [sorted(front) for front in nondominated_sort(objs)]
        assert got == brute_force_fronts(objs)


def test_rank_never_prefers_dominated_over_dominator():
    rng = np.random.default_rng(7)
    objs = [tuple(rng.integers(0, 4, size=3).tolist()) for _ in range(60)]
    fronts = nondominated_sort(objs)
    rank = {}
    for r, front in enumerate(fronts):
        for i in front:
            rank[i] = r
    for p, q in itertools.permutations(range(len(objs)), 2):
        if dominates(objs[p], objs[q]):
            assert rank[p] < rank[q]


# ---------------------------------------------------------------------------
# crowding distance
# ---------------------------------------------------------------------------


def test_crowding_small_fronts_all_infinite():
    assert crowding_distance([(1, 2)]) == [math.inf]
    assert crowding_distance([(1, 2), (3, 4)]) == [math.inf, math.inf]


def test_crowding_three_equally_spaced_points():
    # middle point: per-objective gap spans the full range, contribution 1.0
    front = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]
    dists = crowding_distance(front)
    assert dists[0] == math.inf and dists[2] == math.inf
    assert dists[1] == pytest.approx(2.0)  # 1.0 per objective


def test_crowding_ignores_constant_objective():
    front = [(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)]
    assert crowding_distance(front)[1] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# diversity objectives
# ---------------------------------------------------------------------------


def test_identical_descriptors_have_zero_diversity():
    pop = [make_individual(m=3, j=2) for _ in range(8)]
    assert diversity_objectives(pop) == [(0.0, 0.0)] * 8


def test_two_individual_diversity_value():
    pop = [make_individual(m=3, j=4), make_individual(m=4, j=4)]
    expected = (1.0 - math.exp(-1.0)) / 2.0
    for d_m, d_j in diversity_objectives(pop):
        assert d_m == pytest.approx(expected, abs=1e-12)
        assert d_j == 0.0


def test_diversity_components_bounded():
    rng = np.random.default_rng(8)
    pop = [
        make_individual(m=int(rng.integers(1, 20)), j=int(rng.integers(0, 19)))
        for _ in range(100)
    ]
    for d_m, d_j in diversity_objectives(pop):
        assert 0.0 <= d_m < 1.0
        assert 0.0 <= d_j < 1.0


# ---------------------------------------------------------------------------
# NSGA-II survivor selection
# ---------------------------------------------------------------------------


def test_nsga_duplicate_offspring_keep_parent_objectives():
    algo = Nsga2(fake_evaluator(), AlgoConfig(population=12, init_size=12), VAR, LIMITS)
    rng = np.random.default_rng(9)
    algo.initialize(rng)
    parent_objs = sorted(ind.objectives for ind in algo.population)
    # all-identical evaluations: survivors keep the same objective multiset
    sel, var = rng.spawn(2)
    algo.step(sel, var)
    assert sorted(ind.objectives for ind in algo.population) == parent_objs


def test_nsga_truncation_keeps_full_first_front():
    pool = [make_individual(fitness=float(f), m=m, j=0)
            for f, m in [(9, 1), (8, 5), (7, 9), (1, 1), (0.5, 2), (0.2, 3), (0.1, 4)]]
    survivors = Nsga2._truncate(pool, 4)
    objs = [ind.objectives for ind in pool]
    first = nondominated_sort(objs)[0]
    for i in first:
        assert pool[i] in survivors


def test_nsga_equal_descriptors_reduce_to_fitness_selection():
    pool = [make_individual(fitness=float(f), m=2, j=2) for f in range(40)]
    survivors = Nsga2._truncate(list(pool), 10)
    kept = sorted(ind.fitness for ind in survivors)
    assert kept == [float(f) for f in range(30, 40)]
    for ind in survivors:
        assert ind.diversity == (0.0, 0.0)


def test_nsga_per_removal_mode_matches_target_size():
    pool = [make_individual(fitness=float(i % 7), m=1 + i % 5, j=i % 3)
            for i in range(30)]
    survivors = Nsga2._truncate_per_removal(list(pool), 12)
    assert len(survivors) == 12


def test_nsga_rejects_unknown_recompute_mode():
    with pytest.raises(ValueError):
        Nsga2(fake_evaluator(), AlgoConfig(population=4, init_size=4), VAR, LIMITS,
              diversity_recompute="sometimes")


# ---------------------------------------------------------------------------
# archive
# ---------------------------------------------------------------------------


def test_archive_insert_rules():
    archive = Archive(eta=20)
    first = make_individual(fitness=1.0, m=2, j=3)
    assert archive_insert(archive, first)
    assert not archive_insert(archive, make_individual(fitness=1.0, m=2, j=3))  # tie
    assert not archive_insert(archive, make_individual(fitness=0.5, m=2, j=3))
    assert archive.cells[Descriptor(2, 3)] is first
    assert archive_insert(archive, make_individual(fitness=1.5, m=2, j=3))
    assert archive.cells[Descriptor(2, 3)].fitness == 1.5


def test_archive_rejects_infeasible_descriptor():
    archive = Archive(eta=20)
    with pytest.raises(ValueError):
        archive_insert(archive, make_individual(fitness=1.0, m=15, j=6))
    with pytest.raises(ValueError):
        archive_insert(archive, make_individual(fitness=1.0, m=0, j=3))


def test_archive_matches_max_keeping_map_oracle():
    rng = np.random.default_rng(10)
    archive = Archive(eta=20)
    best = {}
    for _ in range(10_000):
        m = int(rng.integers(1, 21))
        j = int(rng.integers(0, 21 - m))
        fitness = float(rng.uniform(0, 100))
        ind = make_individual(fitness=fitness, m=m, j=j)
        archive_insert(archive, ind)
        if (m, j) not in best or fitness > best[(m, j)]:
            best[(m, j)] = fitness
    assert {tuple(k): v.fitness for k, v in archive.cells.items()} == best


def test_feasible_cell_count_triangular():
    assert feasible_cell_count(20) == 210
    assert feasible_cell_count(1) == 1
    assert feasible_cell_count(3) == 6


# ---------------------------------------------------------------------------
# MAP-Elites stepping
# ---------------------------------------------------------------------------


def test_map_elites_single_cell_parents(monkeypatch):
    algo = MapElites(fake_evaluator(), AlgoConfig(population=8, init_size=3), VAR, LIMITS)
    rng = np.random.default_rng(11)
    algo.initialize(rng)
    assert len(algo.archive) == 1  # all inits share descriptor (1, 0)
    elite = algo.archive.elites()[0]

    captured = {}

    def spy_vary_batch(parents, vrng, cfg):
        captured["parents"] = list(parents)
        return list(parents)

    monkeypatch.setattr("evomod.search.vary_batch", spy_vary_batch)
    sel, var = rng.spawn(2)
    algo.step(sel, var)
    assert captured["parents"] == [elite.genome] * 8


def test_map_elites_occupancy_nondecreasing():
    rng = np.random.default_rng(12)

    def noisy_eval(genome):
        from evomod.phenotype import build_phenotype

        d = build_phenotype(genome, LIMITS).descriptor
        return float(rng.uniform(0, 1)), d

    algo = MapElites(noisy_eval, AlgoConfig(population=20, init_size=40), VAR, LIMITS)
    sel, var = np.random.default_rng(13).spawn(2)
    algo.initialize(np.random.default_rng(14))
    sizes = [len(algo.archive)]
    fitness_by_cell = {k: v.fitness for k, v in algo.archive.cells.items()}
    for _ in range(10):
        algo.step(sel, var)
        sizes.append(len(algo.archive))
        for key, ind in algo.archive.cells.items():
            if key in fitness_by_cell:
                assert ind.fitness >= fitness_by_cell[key]
        fitness_by_cell = {k: v.fitness for k, v in algo.archive.cells.items()}
    assert sizes == sorted(sizes)
