"""Phenotype realization and the pinned-feet kinematic locomotion surrogate.

A genome is realized onto a unit lattice by breadth-first placement; modules
that would collide, exceed the depth limit, or exceed the module budget are
skipped together with their subtree. The realized robot is evaluated with a
deterministic kinematic model: joints follow their sinusoid, the body is
dropped onto the ground plane each step, and modules that stay in ground
contact across consecutive steps act as anchored feet that translate the body.
Fitness is the planar displacement of the root module after a warm-up period.

Frame conventions (fixed by this artifact, one unit cell per module):
- a module's local +X points away from its parent (the connection axis);
- brick child slots sit on local +X, +Y, -Y, +Z, -Z; servo slots on
  +X, +Y, -Y;
- a module's orientation twists its frame about local X in 90 degree steps;
- a servo's hinge axis is its local +Y, its pivot is the centre of the face
  shared with its parent, and the joint moves the servo and all descendants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .genome import (
    JOINT_ANGLE_RANGE,
    ControllerGenes,
    Descriptor,
    Genome,
    ModuleKind,
    MorphLimits,
)

_X, _Y, _Z = np.eye(3, dtype=np.int64)

# Child slot directions in the parent's local frame, indexed by slot number.
BRICK_SLOT_DIRS = (_X, _Y, -_Y, _Z, -_Z)
SERVO_SLOT_DIRS = (_X, _Y, -_Y)

_ROT_X90 = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=np.int64)
_ROT_Z90 = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=np.int64)
_ROT_Y90 = np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], dtype=np.int64)

# Alignment rotation per slot: maps the child's local +X onto the slot
# direction, so a child's frame is parent_frame @ align @ twist(orientation).
_ALIGN = {
    0: np.eye(3, dtype=np.int64),  # +X
    1: _ROT_Z90,  # +Y
    2: _ROT_Z90.T,  # -Y
    3: _ROT_Y90.T,  # +Z
    4: _ROT_Y90,  # -Z
}

_TWIST = tuple(np.linalg.matrix_power(_ROT_X90, q).astype(np.int64) for q in range(4))

HINGE_AXIS_LOCAL = _Y


def slot_directions(kind: ModuleKind) -> tuple:
    return BRICK_SLOT_DIRS if kind is ModuleKind.BRICK else SERVO_SLOT_DIRS


@dataclass(frozen=True)
class SimConfig:
    """Evaluation window and surrogate parameters (times in seconds)."""

    eval_time: float = 20.0
    warmup: float = 2.0
    dt: float = 0.05
    contact_epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.eval_time <= 0:
            raise ValueError(f"eval_time must be > 0, got {self.eval_time}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")


@dataclass
class SimResult:
    fitness: float
    trajectory: Optional[np.ndarray] = None  # rows: step, x, y, z of root


@dataclass
class Phenotype:
    """Lattice-realized robot, arrays indexed by placement (BFS) order."""

    kinds: list
    rest_positions: np.ndarray  # (N, 3) float64, cell centres
    frames: np.ndarray  # (N, 3, 3) int64 orientation frames
    parents: np.ndarray  # (N,) int64, -1 for the root
    segment_of_module: np.ndarray  # (N,) rigid segment id, root segment 0
    joint_modules: np.ndarray  # (J,) module indices of servos
    joint_axes: np.ndarray  # (J, 3) rest-frame hinge axes
    joint_pivots: np.ndarray  # (J, 3) rest-frame pivot points
    joint_genes: np.ndarray  # (J, 4) alpha, omega, phi, offset
    descriptor: Descriptor

    @property
    def module_count(self) -> int:
        return len(self.kinds)

    @property
    def joint_count(self) -> int:
        return len(self.joint_modules)

    @property
    def joints(self) -> list:
        """(module id, hinge axis, controller genes) per movable joint."""
        return [
            (int(m), self.joint_axes[k].copy(), ControllerGenes(*self.joint_genes[k]))
            for k, m in enumerate(self.joint_modules)
        ]


def build_phenotype(genome: Genome, limits: MorphLimits) -> Phenotype:
    """Place the genome's modules breadth-first on the unit lattice.

    A module whose target cell is occupied, whose depth exceeds delta, or
    that would exceed the eta module budget is skipped with its whole
    subtree. The root is always placed at the origin.
    """
    root = genome.root
    kinds = [root.kind]
    positions = [np.zeros(3, dtype=np.int64)]
    frames = [_TWIST[root.orientation].copy()]
    parents = [-1]
    segments = [0]
    joint_rows = []  # (module index, axis, pivot, genes)
    occupied = {(0, 0, 0)}

    # queue entries: (node, module index); children are examined in slot order
    queue = [(root, 0)]
    head = 0
    while head < len(queue):
        node, index = queue[head]
        head += 1
        pos = positions[index]
        frame = frames[index]
        for slot, child in enumerate(node.children):
            if child is None:
                continue
            if len(kinds) >= limits.eta:
                continue
            direction = frame @ slot_directions(node.kind)[slot]
            child_pos = pos + direction
            cell = tuple(int(c) for c in child_pos)
            if cell in occupied:
                continue
            depth = _depth_of(parents, index) + 1
            if depth > limits.delta:
                continue
            child_frame = frame @ _ALIGN[slot] @ _TWIST[child.orientation]
            child_index = len(kinds)
            kinds.append(child.kind)
            positions.append(child_pos)
            frames.append(child_frame)
            parents.append(index)
            occupied.add(cell)
            if child.kind.is_joint:
                segments.append(len(joint_rows) + 1)
                genes = child.controller
                joint_rows.append(
                    (
                        child_index,
                        child_frame @ HINGE_AXIS_LOCAL,
                        (pos + child_pos) / 2.0,
                        (genes.alpha, genes.omega, genes.phi, genes.offset),
                    )
                )
            else:
                segments.append(segments[index])
            queue.append((child, child_index))

    joint_count = len(joint_rows)
    m_count = sum(1 for k in kinds if not k.is_joint)
    return Phenotype(
        kinds=kinds,
        rest_positions=np.array(positions, dtype=np.float64),
        frames=np.array(frames, dtype=np.int64),
        parents=np.array(parents, dtype=np.int64),
        segment_of_module=np.array(segments, dtype=np.int64),
        joint_modules=np.array([r[0] for r in joint_rows], dtype=np.int64),
        joint_axes=np.array([r[1] for r in joint_rows], dtype=np.float64).reshape(
            joint_count, 3
        ),
        joint_pivots=np.array([r[2] for r in joint_rows], dtype=np.float64).reshape(
            joint_count, 3
        ),
        joint_genes=np.array([r[3] for r in joint_rows], dtype=np.float64).reshape(
            joint_count, 4
        ),
        descriptor=Descriptor(m=m_count, j=joint_count),
    )


def _depth_of(parents: list, index: int) -> int:
    depth = 0
    while parents[index] != -1:
        index = parents[index]
        depth += 1
    return depth


def joint_angle(genes: ControllerGenes, t: float) -> float:
    """Sinusoidal set-point, clamped to the joint's allowable angle range."""
    lo, hi = JOINT_ANGLE_RANGE
    raw = genes.alpha * math.sin(genes.omega * t + genes.phi) + genes.offset
    return float(min(max(raw, lo), hi))


def _joint_angles(p: Phenotype, times: np.ndarray) -> np.ndarray:
    """(T, J) clamped joint angles for every step."""
    alpha, omega, phi, offset = p.joint_genes.T
    raw = alpha[None, :] * np.sin(omega[None, :] * times[:, None] + phi[None, :])
    lo, hi = JOINT_ANGLE_RANGE
    return np.clip(raw + offset[None, :], lo, hi)


def _axis_rotations(axis: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """(T, 3, 3) rotations about a unit axis, Rodrigues form."""
    c = np.cos(angles)
    s = np.sin(angles)
    ax, ay, az = axis
    cross = np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])
    outer = np.outer(axis, axis)
    eye = np.eye(3)
    return (
        c[:, None, None] * eye
        + s[:, None, None] * cross
        + (1.0 - c)[:, None, None] * outer
    )


def _world_positions(p: Phenotype, angles: np.ndarray) -> np.ndarray:
    """(T, N, 3) module positions in body coordinates before the ground drop.

    Each servo joint contributes an affine transform (rotation about its pivot)
    composed onto its parent's rigid-segment transform.
    """
    steps = angles.shape[0]
    segment_count = p.joint_count + 1
    seg_rot = np.empty((segment_count, steps, 3, 3))
    seg_tra = np.empty((segment_count, steps, 3))
    seg_rot[0] = np.eye(3)
    seg_tra[0] = 0.0
    for k in range(p.joint_count):
        module = int(p.joint_modules[k])
        parent_seg = int(p.segment_of_module[p.parents[module]])
        rot_j = _axis_rotations(p.joint_axes[k], angles[:, k])
        pivot = p.joint_pivots[k]
        tra_j = pivot - rot_j @ pivot
        seg_rot[k + 1] = seg_rot[parent_seg] @ rot_j
        seg_tra[k + 1] = (
            np.einsum("tij,tj->ti", seg_rot[parent_seg], tra_j) + seg_tra[parent_seg]
        )

    world = np.empty((steps, p.module_count, 3))
    for seg in range(segment_count):
        members = np.nonzero(p.segment_of_module == seg)[0]
        if members.size == 0:
            continue
        rest = p.rest_positions[members]
        world[:, members, :] = (
            np.einsum("tij,nj->tni", seg_rot[seg], rest) + seg_tra[seg][:, None, :]
        )
    return world


def simulate(
    p: Phenotype,
    cfg: SimConfig,
    record_trajectory: bool = False,
    initial_offset: tuple = (0.0, 0.0),
) -> SimResult:
    """Run the surrogate and return planar root displacement after warm-up.

    Per step: set joint angles, run forward kinematics, drop the body onto
    z=0, then translate the body opposite to the mean horizontal motion of
    modules that were in ground contact in both this and the previous step
    (anchored feet stay put). `initial_offset` places the body in the plane
    for trajectory recording only; fitness is displacement-based and exactly
    independent of it.
    """
    n_steps = int(round((cfg.warmup + cfg.eval_time) / cfg.dt))
    if n_steps < 1:
        raise ValueError("simulation window shorter than one timestep")
    times = np.arange(n_steps + 1) * cfg.dt

    angles = _joint_angles(p, times)
    world = _world_positions(p, angles)
    world[:, :, 2] -= world[:, :, 2].min(axis=1, keepdims=True)

    contact = world[:, :, 2] <= cfg.contact_epsilon
    persistent = contact[:-1] & contact[1:]
    disp = world[1:, :, :2] - world[:-1, :, :2]
    counts = persistent.sum(axis=1)
    sums = (disp * persistent[:, :, None]).sum(axis=1)
    delta = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], 0.0)

    offsets = np.empty((n_steps + 1, 2))
    offsets[0] = 0.0
    offsets[1:] = -np.cumsum(delta, axis=0)

    root_xy = world[:, 0, :2] + offsets
    k_warm = min(int(math.ceil(cfg.warmup / cfg.dt - 1e-9)), n_steps)
    span = root_xy[-1] - root_xy[k_warm]
    fitness = float(math.hypot(span[0], span[1]))

    trajectory = None
    if record_trajectory:
        trajectory = np.column_stack(
            [
                np.arange(n_steps + 1, dtype=np.float64),
                root_xy + np.asarray(initial_offset, dtype=np.float64),
                world[:, 0, 2],
            ]
        )
    return SimResult(fitness=fitness, trajectory=trajectory)


def evaluate(genome: Genome, limits: MorphLimits, cfg: SimConfig) -> tuple:
    """Realize and simulate a genome: the single evaluation entry point.

    Returns (fitness, descriptor).
    """
    p = build_phenotype(genome, limits)
    return simulate(p, cfg).fitness, p.descriptor
