"""Greedy wedge-sweep search over a logical grid of unseen cells.

A searcher drops a disk-shaped logical grid around the spot it cares about
(usually where it last knew the player to be).  Every motion primitive it
could play next is scored by how many still-unseen cells the primitive's
vision wedge would newly cover, recently played primitives are skipped, and
the best one runs.  Swept cells are committed as seen on arrival, so the
count of unseen cells only ever falls and the search walks its own frontier
until nothing scoreable is left.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .world import (
    Cell,
    CellKind,
    GridMap,
    Point,
    Pose,
    RayHeight,
    cells_in_wedge,
    raycast,
)


class CanvassCell(Enum):
    UNSEEN = "unseen"
    SEEN = "seen"
    BLOCKED_SEEN = "blocked_seen"


@dataclass
class CanvassGrid:
    """Cell states over the disk footprint of one canvass.

    Walls and cells outside the radius start (and stay) BlockedSeen; the
    rest start Unseen and may only move to Seen.
    """

    origin: Point
    radius: float
    states: dict[Cell, CanvassCell]

    def unseen_count(self) -> int:
        return sum(1 for s in self.states.values() if s is CanvassCell.UNSEEN)

    def state_at(self, cell: Cell) -> CanvassCell | None:
        return self.states.get(cell)

    def mark_seen(self, cells: set[Cell]) -> None:
        for cell in cells:
            if self.states.get(cell) is CanvassCell.UNSEEN:
                self.states[cell] = CanvassCell.SEEN


@dataclass(frozen=True)
class Wedge:
    half_angle: float
    radius: float


@dataclass(frozen=True)
class MotionPrimitive:
    """One playable search move: shift in the local frame, turn, then sweep.

    displacement is in the agent's local frame (+x along current heading);
    the wedges are swept at the post-motion pose.
    """

    id: int
    displacement: Point
    rotation: float
    wedges: tuple[Wedge, ...]


def default_primitives() -> tuple[MotionPrimitive, ...]:
    """Stock search set: four turns in place, four step-and-scans.

    Turns sweep a wide wedge where the new heading points; steps move 1.5
    units toward a bearing, face that way and sweep a tighter wedge.  The
    wedge radii are sized so a room up to 13x13 is fully swept within 60
    picks from any start; shrinking them strands unseen pockets the greedy
    can no longer reach.
    """
    prims: list[MotionPrimitive] = []
    for pid, deg in enumerate((45.0, -45.0, 90.0, -90.0)):
        prims.append(
            MotionPrimitive(
                pid, Point(0.0, 0.0), math.radians(deg), (Wedge(math.radians(60.0), 3.5),)
            )
        )
    for pid, deg in enumerate((0.0, 60.0, -60.0, 180.0), start=4):
        a = math.radians(deg)
        prims.append(
            MotionPrimitive(
                pid,
                Point(1.5 * math.cos(a), 1.5 * math.sin(a)),
                a,
                (Wedge(math.radians(45.0), 3.0),),
            )
        )
    return tuple(prims)


class RecencyBuffer:
    """Ring of the last R primitive ids played."""

    def __init__(self, capacity: int = 3) -> None:
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self._ring: deque[int] = deque(maxlen=capacity)

    def __contains__(self, primitive_id: int) -> bool:
        return primitive_id in self._ring

    def push(self, primitive_id: int) -> None:
        if self._ring.maxlen:
            self._ring.append(primitive_id)

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self._ring)


def init_canvass(grid: GridMap, center: Pose, radius: float) -> CanvassGrid:
    """Seed the logical grid for the disk of given radius around center."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    cx, cy = center.position
    lo_x = max(0, int(math.floor(cx - radius)))
    hi_x = min(grid.width - 1, int(math.ceil(cx + radius)))
    lo_y = max(0, int(math.floor(cy - radius)))
    hi_y = min(grid.height - 1, int(math.ceil(cy + radius)))
    states: dict[Cell, CanvassCell] = {}
    for j in range(lo_y, hi_y + 1):
        for i in range(lo_x, hi_x + 1):
            cell = (i, j)
            in_disk = center.position.dist(grid.cell_center(cell)) <= radius
            if not in_disk or grid.kind_at(i, j) is CellKind.WALL:
                states[cell] = CanvassCell.BLOCKED_SEEN
            else:
                states[cell] = CanvassCell.UNSEEN
    return CanvassGrid(center.position, radius, states)


def post_motion_pose(pose: Pose, primitive: MotionPrimitive) -> Pose:
    """World-frame pose after playing the primitive from the given pose."""
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    dx, dy = primitive.displacement
    world = Point(pose.position.x + dx * c - dy * s, pose.position.y + dx * s + dy * c)
    return Pose(world, pose.heading + primitive.rotation)


def _motion_valid(grid: GridMap, pose: Pose, primitive: MotionPrimitive) -> bool:
    end = post_motion_pose(pose, primitive).position
    if not grid.in_bounds_point(end):
        return False
    if grid.kind_at(*grid.cell_of(end)) is CellKind.WALL:
        return False
    # Walls block the motion segment; low cover is walkable.
    return raycast(grid, pose.position, end, RayHeight.STAND).clear


def swept_cells(
    canvass: CanvassGrid, grid: GridMap, pose: Pose, primitive: MotionPrimitive
) -> set[Cell]:
    """Union of wedge coverage at the post-motion pose, clipped to the canvass."""
    after = post_motion_pose(pose, primitive)
    cells: set[Cell] = set()
    for wedge in primitive.wedges:
        cells |= cells_in_wedge(grid, after, wedge.half_angle, wedge.radius)
    return {c for c in cells if c in canvass.states}


def score_primitive(
    canvass: CanvassGrid, grid: GridMap, pose: Pose, primitive: MotionPrimitive
) -> int:
    """Newly covered unseen cells, or -1 when the motion itself is illegal."""
    if not _motion_valid(grid, pose, primitive):
        return -1
    return sum(
        1
        for c in swept_cells(canvass, grid, pose, primitive)
        if canvass.states[c] is CanvassCell.UNSEEN
    )


@dataclass(frozen=True)
class CanvassStep:
    """Outcome of one choose_and_apply call.

    primitive_id is None when every primitive was invalid; the pose then
    carries the no-op fallback turn and stalled is set.
    """

    primitive_id: int | None
    pose: Pose
    stalled: bool


def choose_and_apply(
    canvass: CanvassGrid,
    grid: GridMap,
    pose: Pose,
    primitives: tuple[MotionPrimitive, ...],
    recency: RecencyBuffer,
) -> CanvassStep:
    """Pick the best-scoring primitive, commit its wedge, advance the pose.

    Recently played primitives are filtered out first.  If the fresh ones
    can do no better than 0 while a filtered one still scores, the filter
    is waived so the search cannot wedge itself into a dead rotation.
    Ties go to the lowest id, except on an all-zero plateau with unseen
    cells left: there the tie goes to the primitive that lands nearest the
    closest unseen cell, so the searcher relocates toward the remaining
    pocket instead of idling where every wedge is already swept.
    Canvass grid and recency update in place.
    """
    if not primitives:
        raise ValueError("need at least one primitive")
    scores = {p.id: score_primitive(canvass, grid, pose, p) for p in primitives}
    valid = [p for p in primitives if scores[p.id] >= 0]
    if not valid:
        fallback = Pose(pose.position, pose.heading + math.radians(45.0))
        return CanvassStep(None, fallback, stalled=True)

    fresh = [p for p in valid if p.id not in recency]
    pool = fresh
    if not fresh:
        pool = valid
    elif max(scores[p.id] for p in fresh) == 0:
        # Liveness: fresh primitives are all useless, so the recency filter
        # yields, either to a recent primitive that still scores or to an
        # unhindered relocation walk below.
        pool = valid

    best = max(scores[p.id] for p in pool)
    if best == 0 and canvass.unseen_count() > 0:
        targets = [
            grid.cell_center(c)
            for c in sorted(canvass.states)
            if canvass.states[c] is CanvassCell.UNSEEN
        ]

        def pull(p: MotionPrimitive) -> tuple[float, int]:
            landing = post_motion_pose(pose, p).position
            return min(landing.dist(t) for t in targets), p.id

        chosen = min(pool, key=pull)
    else:
        chosen = min(pool, key=lambda p: (-scores[p.id], p.id))
    new_pose = post_motion_pose(pose, chosen)
    canvass.mark_seen(swept_cells(canvass, grid, pose, chosen))
    recency.push(chosen.id)
    return CanvassStep(chosen.id, new_pose, stalled=False)


def canvass_done(
    canvass: CanvassGrid,
    grid: GridMap,
    pose: Pose,
    primitives: tuple[MotionPrimitive, ...],
) -> bool:
    """True when nothing is left to uncover or nothing playable would help."""
    if canvass.unseen_count() == 0:
        return True
    return all(score_primitive(canvass, grid, pose, p) <= 0 for p in primitives)
