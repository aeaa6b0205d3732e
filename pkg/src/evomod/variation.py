"""Mutation and crossover operators over genomes.

All operators are pure: inputs are never modified, outputs are new genomes,
and results are fully determined by the passed random generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genome import (
    CONTROLLER_RANGES,
    ControllerGenes,
    Genome,
    ModuleKind,
    MorphNode,
    free_slot_paths,
    iter_paths,
    node_at,
    non_root_paths,
    random_node,
    replace_subtree,
)

_PARAM_ORDER = ("alpha", "omega", "phi", "offset")


@dataclass(frozen=True)
class VariationConfig:
    """Operator rates. sigma is the controller noise magnitude in [0, 1],
    scaled to each parameter's full range width.

    mutate_after_crossover=False makes crossover and mutation exclusive per
    offspring pair instead of chained.
    """

    p_morph: float = 0.2
    p_cross: float = 0.2
    p_ctrl: float = 0.2
    sigma: float = 0.05
    mutate_after_crossover: bool = True

    def __post_init__(self) -> None:
        for name in ("p_morph", "p_cross", "p_ctrl", "sigma"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


def bounce_back(value: float, lo: float, hi: float) -> float:
    """Reflect `value` off the range bounds until it lies in [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"bounce_back needs lo < hi, got [{lo}, {hi}]")
    while value < lo or value > hi:
        if value < lo:
            value = lo + (lo - value)
        else:
            value = hi - (value - hi)
    return value


def mutate_morphology(genome: Genome, rng: np.random.Generator, p_morph: float) -> Genome:
    """With probability p_morph apply exactly one structural edit.

    The edit is chosen uniformly among the feasible options: add a random
    module at a random free slot, remove a random non-root module with its
    subtree, or re-orient a random module. On a root-only tree "remove" is
    infeasible and the draw is over the remaining options.
    """
    if rng.random() >= p_morph:
        return genome
    root = genome.root
    removable = non_root_paths(root)
    options = ["add", "mutate"] if not removable else ["add", "remove", "mutate"]
    op = options[int(rng.integers(len(options)))]
    if op == "add":
        slots = free_slot_paths(root)
        slot_path = slots[int(rng.integers(len(slots)))]
        return Genome(replace_subtree(root, slot_path, random_node(rng)))
    if op == "remove":
        victim = removable[int(rng.integers(len(removable)))]
        return Genome(replace_subtree(root, victim, None))
    paths = [path for path, _ in iter_paths(root)]
    target = paths[int(rng.integers(len(paths)))]
    node = node_at(root, target)
    reoriented = MorphNode(node.kind, int(rng.integers(4)), node.children, node.controller)
    return Genome(replace_subtree(root, target, reoriented))


def crossover(a: Genome, b: Genome, rng: np.random.Generator) -> tuple:
    """Exchange one uniformly chosen non-root subtree between the parents.

    Root-only parents have no exchangeable branch; the offspring are then
    copies of the parents.
    """
    paths_a = non_root_paths(a.root)
    paths_b = non_root_paths(b.root)
    if not paths_a or not paths_b:
        return a, b
    pick_a = paths_a[int(rng.integers(len(paths_a)))]
    pick_b = paths_b[int(rng.integers(len(paths_b)))]
    sub_a = node_at(a.root, pick_a)
    sub_b = node_at(b.root, pick_b)
    child_a = Genome(replace_subtree(a.root, pick_a, sub_b))
    child_b = Genome(replace_subtree(b.root, pick_b, sub_a))
    return child_a, child_b


def _mutated_genes(
    genes: ControllerGenes, rng: np.random.Generator, p_ctrl: float, sigma: float
) -> ControllerGenes:
    values = {}
    for name in _PARAM_ORDER:
        value = getattr(genes, name)
        if rng.random() < p_ctrl:
            lo, hi = CONTROLLER_RANGES[name]
            value = bounce_back(float(rng.normal(value, sigma * (hi - lo))), lo, hi)
        values[name] = value
    return ControllerGenes(**values)


def mutate_controllers(
    genome: Genome, rng: np.random.Generator, cfg: VariationConfig
) -> Genome:
    """Gaussian-perturb each controller parameter independently with
    probability p_ctrl, reflecting results back into range."""

    def rebuild(node: MorphNode) -> MorphNode:
        children = tuple(
            None if child is None else rebuild(child) for child in node.children
        )
        controller = node.controller
        if node.kind is ModuleKind.SERVO:
            controller = _mutated_genes(controller, rng, cfg.p_ctrl, cfg.sigma)
        return MorphNode(node.kind, node.orientation, children, controller)

    return Genome(rebuild(genome.root))


def vary_pair(
    a: Genome, b: Genome, rng: np.random.Generator, cfg: VariationConfig
) -> tuple:
    """Variation pipeline for one parent pair: crossover then mutation."""
    crossed = rng.random() < cfg.p_cross
    if crossed:
        a, b = crossover(a, b, rng)
    if cfg.mutate_after_crossover or not crossed:
        a = mutate_controllers(mutate_morphology(a, rng, cfg.p_morph), rng, cfg)
        b = mutate_controllers(mutate_morphology(b, rng, cfg.p_morph), rng, cfg)
    return a, b


def vary_batch(
    parents: list, rng: np.random.Generator, cfg: VariationConfig
) -> list:
    """Vary consecutive parent pairs, preserving order; an odd trailing
    parent is mutated without crossover."""
    offspring = []
    for i in range(0, len(parents) - 1, 2):
        child_a, child_b = vary_pair(parents[i], parents[i + 1], rng, cfg)
        offspring.extend((child_a, child_b))
    if len(parents) % 2:
        last = parents[-1]
        last = mutate_controllers(mutate_morphology(last, rng, cfg.p_morph), rng, cfg)
        offspring.append(last)
    return offspring
