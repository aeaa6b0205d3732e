"""Genotype model for modular robots: a morphology tree with embedded controller genes.

A robot genome is a rooted tree of modules. Two module kinds exist: a
non-movable brick with 5 child slots and a servo joint with 3 child slots.
Every servo carries one sinusoidal controller parameter tuple, so subtree
exchange transports control together with morphology. Genomes are immutable;
all operators build new trees.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

GENOME_SCHEMA = "evomod-genome/1"

# Controller gene ranges (amplitude, frequency, phase, offset) and the joint
# set-point clamp. Sinusoid: angle(t) = alpha * sin(omega * t + phi) + offset.
ALPHA_RANGE = (-1.57, 1.57)
OMEGA_RANGE = (0.2, 2.0)
PHI_RANGE = (-2.0 * math.pi, 2.0 * math.pi)
OFFSET_RANGE = (-1.57, 1.57)
JOINT_ANGLE_RANGE = (-1.57, 1.57)

CONTROLLER_RANGES = {
    "alpha": ALPHA_RANGE,
    "omega": OMEGA_RANGE,
    "phi": PHI_RANGE,
    "offset": OFFSET_RANGE,
}

ORIENTATIONS = (0, 1, 2, 3)


class GenomeFormatError(ValueError):
    """Raised when genome text cannot be parsed into a valid genome."""


class ModuleKind(enum.Enum):
    BRICK = "brick"
    SERVO = "servo"

    @property
    def slot_count(self) -> int:
        return 5 if self is ModuleKind.BRICK else 3

    @property
    def is_joint(self) -> bool:
        return self is ModuleKind.SERVO


class Descriptor(NamedTuple):
    """Morphology descriptor: non-movable module count, movable joint count."""

    m: int
    j: int


@dataclass(frozen=True)
class MorphLimits:
    """Realization limits: maximum module count and maximum tree depth."""

    eta: int = 20
    delta: int = 4

    def __post_init__(self) -> None:
        if self.eta < 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class ControllerGenes:
    alpha: float
    omega: float
    phi: float
    offset: float

    def __post_init__(self) -> None:
        for name, (lo, hi) in CONTROLLER_RANGES.items():
            value = getattr(self, name)
            if not lo <= value <= hi:
                raise ValueError(
                    f"controller gene {name}={value} outside [{lo}, {hi}]"
                )


@dataclass(frozen=True)
class MorphNode:
    """One module in the tree. `children` has fixed arity per kind (5/3)."""

    kind: ModuleKind
    orientation: int
    children: tuple
    controller: Optional[ControllerGenes] = None

    def __post_init__(self) -> None:
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be in 0..3, got {self.orientation}")
        if len(self.children) != self.kind.slot_count:
            raise ValueError(
                f"{self.kind.value} node needs {self.kind.slot_count} child slots, "
                f"got {len(self.children)}"
            )
        if self.kind.is_joint and self.controller is None:
            raise ValueError("servo node requires controller genes")
        if not self.kind.is_joint and self.controller is not None:
            raise ValueError("brick node must not carry controller genes")


@dataclass(frozen=True)
class Genome:
    """Morphology tree rooted at a brick, controller genes on servo nodes."""

    root: MorphNode

    def __post_init__(self) -> None:
        if self.root.kind is not ModuleKind.BRICK:
            raise ValueError("genome root must be a brick module")


def brick(orientation: int = 0, children: Optional[tuple] = None) -> MorphNode:
    return MorphNode(ModuleKind.BRICK, orientation, children or (None,) * 5)


def servo(
    controller: ControllerGenes,
    orientation: int = 0,
    children: Optional[tuple] = None,
) -> MorphNode:
    return MorphNode(ModuleKind.SERVO, orientation, children or (None,) * 3, controller)


# ---------------------------------------------------------------------------
# Tree traversal helpers. Paths are tuples of child-slot indices from the root.
# ---------------------------------------------------------------------------


def iter_nodes(node: MorphNode) -> Iterator[MorphNode]:
    """Preorder traversal of the subtree rooted at `node`."""
    yield node
    for child in node.children:
        if child is not None:
            yield from iter_nodes(child)


def iter_paths(node: MorphNode, path: tuple = ()) -> Iterator[tuple]:
    """Preorder (path, node) pairs; the root has path ()."""
    yield path, node
    for slot, child in enumerate(node.children):
        if child is not None:
            yield from iter_paths(child, path + (slot,))


def node_count(genome: Genome) -> int:
    return sum(1 for _ in iter_nodes(genome.root))


def node_at(root: MorphNode, path: tuple) -> MorphNode:
    node = root
    for slot in path:
        node = node.children[slot]
    return node


def replace_subtree(
    root: MorphNode, path: tuple, subtree: Optional[MorphNode]
) -> MorphNode:
    """Rebuild the tree with the node at `path` replaced (None deletes it)."""
    if not path:
        if subtree is None:
            raise ValueError("cannot delete the root")
        return subtree
    slot = path[0]
    if len(path) == 1:
        new_child = subtree
    else:
        new_child = replace_subtree(root.children[slot], path[1:], subtree)
    children = root.children[:slot] + (new_child,) + root.children[slot + 1 :]
    return MorphNode(root.kind, root.orientation, children, root.controller)


def free_slot_paths(root: MorphNode) -> list:
    """All unoccupied child positions, as would-be child paths, preorder."""
    slots = []
    for path, node in iter_paths(root):
        for slot, child in enumerate(node.children):
            if child is None:
                slots.append(path + (slot,))
    return slots


def non_root_paths(root: MorphNode) -> list:
    return [path for path, _ in iter_paths(root) if path]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def random_controller(rng: np.random.Generator) -> ControllerGenes:
    return ControllerGenes(
        alpha=float(rng.uniform(*ALPHA_RANGE)),
        omega=float(rng.uniform(*OMEGA_RANGE)),
        phi=float(rng.uniform(*PHI_RANGE)),
        offset=float(rng.uniform(*OFFSET_RANGE)),
    )


def random_node(rng: np.random.Generator) -> MorphNode:
    """A fresh leaf module: uniform kind, uniform orientation, random genes."""
    kind = ModuleKind.BRICK if rng.integers(2) == 0 else ModuleKind.SERVO
    orientation = int(rng.integers(4))
    if kind.is_joint:
        return servo(random_controller(rng), orientation)
    return brick(orientation)


def random_genome(rng: np.random.Generator, limits: MorphLimits) -> Genome:
    """Grow a random tree until its realized module count equals a uniformly
    drawn target size in [1, eta].

    Modules are attached one at a time at uniformly random free slots. An
    attachment that would not be realized (its lattice cell is already taken
    or it exceeds the depth limit) is discarded and redrawn, so initial
    genomes carry no unexpressed modules; a bounded retry count guards
    against cramped morphologies with no realizable slot left.
    """
    from .phenotype import build_phenotype  # deferred: phenotype imports genome

    target = int(rng.integers(1, limits.eta + 1))
    root = brick(orientation=int(rng.integers(4)))
    realized = 1
    attempts = 0
    while realized < target and attempts < 100:
        slots = free_slot_paths(root)
        slot_path = slots[int(rng.integers(len(slots)))]
        candidate = replace_subtree(root, slot_path, random_node(rng))
        grown = build_phenotype(Genome(candidate), limits).module_count
        attempts += 1
        if grown > realized:
            root = candidate
            realized = grown
            attempts = 0
    return Genome(root)


def descriptor(genome: Genome, limits: MorphLimits) -> Descriptor:
    """Descriptor of the realized phenotype (after size/depth truncation)."""
    from .phenotype import build_phenotype  # deferred: phenotype imports genome

    return build_phenotype(genome, limits).descriptor


# ---------------------------------------------------------------------------
# Serialization: versioned JSON text, round-trip identity on structural
# equality. Used by archive dumps and replay.
# ---------------------------------------------------------------------------


def _node_to_dict(node: MorphNode) -> dict:
    out: dict = {
        "kind": node.kind.value,
        "orientation": node.orientation,
        "children": [
            None if child is None else _node_to_dict(child) for child in node.children
        ],
    }
    if node.controller is not None:
        genes = node.controller
        out["controller"] = {
            "alpha": genes.alpha,
            "omega": genes.omega,
            "phi": genes.phi,
            "offset": genes.offset,
        }
    return out


def serialize(genome: Genome) -> str:
    return json.dumps(
        {"schema": GENOME_SCHEMA, "root": _node_to_dict(genome.root)},
        separators=(",", ":"),
    )


def _node_from_dict(data: object) -> MorphNode:
    if not isinstance(data, dict):
        raise GenomeFormatError(f"module node must be an object, got {type(data).__name__}")
    try:
        kind = ModuleKind(data["kind"])
    except (KeyError, ValueError) as exc:
        raise GenomeFormatError(f"bad module kind: {data.get('kind')!r}") from exc
    orientation = data.get("orientation")
    if orientation not in ORIENTATIONS:
        raise GenomeFormatError(f"bad orientation: {orientation!r}")
    raw_children = data.get("children")
    if not isinstance(raw_children, list) or len(raw_children) != kind.slot_count:
        raise GenomeFormatError(
            f"{kind.value} node needs exactly {kind.slot_count} child entries"
        )
    children = tuple(
        None if entry is None else _node_from_dict(entry) for entry in raw_children
    )
    controller = None
    if kind.is_joint:
        raw = data.get("controller")
        if not isinstance(raw, dict) or set(raw) != set(CONTROLLER_RANGES):
            raise GenomeFormatError("servo node needs controller {alpha,omega,phi,offset}")
        try:
            controller = ControllerGenes(
                alpha=float(raw["alpha"]),
                omega=float(raw["omega"]),
                phi=float(raw["phi"]),
                offset=float(raw["offset"]),
            )
        except (TypeError, ValueError) as exc:
            raise GenomeFormatError(f"bad controller genes: {exc}") from exc
    elif "controller" in data:
        raise GenomeFormatError("brick node must not carry controller genes")
    return MorphNode(kind, orientation, children, controller)


def deserialize(text: str) -> Genome:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GenomeFormatError(f"genome text is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("schema") != GENOME_SCHEMA:
        raise GenomeFormatError(
            f"unsupported genome schema: {payload.get('schema') if isinstance(payload, dict) else payload!r}"
        )
    root = _node_from_dict(payload.get("root"))
    if root.kind is not ModuleKind.BRICK:
        raise GenomeFormatError("genome root must be a brick module")
    return Genome(root)
