"""Grid world: cells, poses, raycasts, pathfinding and wedge queries.

The map is a rectangle of unit cells.  Cell (ix, iy) spans [ix, ix+1) x
[iy, iy+1) in world units and its center sits at (ix + 0.5, iy + 0.5).
Row index grows downward on screen but nothing here cares about that.

Occlusion is two-level: a ray cast at Stand height is stopped only by Wall
cells, a ray cast at Crouch height is stopped by LowCover as well.  Rays walk
the exact sequence of cells the segment crosses; there is no sampling, so
results are reproducible to the bit.  When a segment passes exactly through
a cell corner both orthogonal neighbours of the corner are visited.  That is
the strict reading: you cannot see through the gap between two diagonally
touching walls, and it keeps raycast symmetric in its endpoints.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterator, NamedTuple

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

Cell = tuple[int, int]


class CellKind(IntEnum):
    FREE = 0
    LOW_COVER = 1
    WALL = 2


_CELL_CHARS = {".": CellKind.FREE, "~": CellKind.LOW_COVER, "#": CellKind.WALL}


class RayHeight(Enum):
    STAND = "stand"
    CROUCH = "crouch"


# Minimum CellKind value that stops a ray at each height.
_BLOCKS_AT = {RayHeight.STAND: CellKind.WALL, RayHeight.CROUCH: CellKind.LOW_COVER}

# Two boundary crossings whose parameters differ by less than this are one
# corner crossing.  True corners on half-unit lattices are exact or off by an
# ulp; distinct crossings on maps this size differ by at least ~1e-4.
_CORNER_EPS = 1e-12


class Point(NamedTuple):
    x: float
    y: float

    def __add__(self, other: "Point") -> "Point":  # type: ignore[override]
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Point":
        return Point(self.x * k, self.y * k)

    def length(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def normalize_angle(a: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


def angle_diff(a: float, b: float) -> float:
    """Absolute angular distance between two bearings, in [0, pi]."""
    d = math.fmod(a - b, TWO_PI)
    if d < -math.pi:
        d += TWO_PI
    elif d > math.pi:
        d -= TWO_PI
    return abs(d)


def bearing(frm: Point, to: Point) -> float:
    """Direction of travel from `frm` to `to`, in [0, 2*pi)."""
    return normalize_angle(math.atan2(to.y - frm.y, to.x - frm.x))


def unit_vector(heading: float) -> Point:
    return Point(math.cos(heading), math.sin(heading))


@dataclass(frozen=True)
class Pose:
    """Position plus facing.  Heading 0 points along +x."""

    position: Point
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @staticmethod
    def at(x: float, y: float, heading: float = 0.0) -> "Pose":
        return Pose(Point(x, y), heading)


@dataclass(frozen=True)
class RayHit:
    """Outcome of a raycast.  hit_point / hit_cell are set iff blocked.

    For a hit on the map border, hit_cell is the out-of-bounds cell the ray
    tried to enter; callers treat it as diagnostic only.
    """

    blocked: bool
    hit_point: Point | None = None
    hit_cell: Cell | None = None

    @property
    def clear(self) -> bool:
        return not self.blocked


@dataclass(frozen=True)
class PathResult:
    found: bool
    waypoints: tuple[Point, ...] = ()
    length: float = math.inf


@dataclass
class GridMap:
    """Immutable-by-convention cell grid.  cells is row-major, iy * width + ix."""

    width: int
    height: int
    cells: list[CellKind]

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"degenerate map {self.width}x{self.height}")
        if len(self.cells) != self.width * self.height:
            raise ValueError("cell list does not match map dimensions")

    @staticmethod
    def from_rows(rows: list[str]) -> "GridMap":
        """Build from ASCII rows of '#', '~' and '.'.

        Any character outside the terrain legend counts as Free so callers
        can pass rows that still carry agent markers.
        """
        if not rows:
            raise ValueError("empty map")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged map rows")
        cells = [_CELL_CHARS.get(ch, CellKind.FREE) for row in rows for ch in row]
        return GridMap(width, len(rows), cells)

    def kind_at(self, ix: int, iy: int) -> CellKind:
        """Cell kind; anything outside the rectangle acts as Wall."""
        if 0 <= ix < self.width and 0 <= iy < self.height:
            return CellKind(self.cells[iy * self.width + ix])
        return CellKind.WALL

    def in_bounds_cell(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def in_bounds_point(self, p: Point) -> bool:
        return 0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height

    def cell_of(self, p: Point) -> Cell:
        """Containing cell of an in-bounds point.

        Points exactly on the outer max border belong to the last cell, so
        the closed rectangle [0, width] x [0, height] is fully covered.
        """
        ix = int(p.x)
        iy = int(p.y)
        if ix >= self.width:
            ix = self.width - 1
        if iy >= self.height:
            iy = self.height - 1
        return ix, iy

    def cell_center(self, cell: Cell) -> Point:
        return Point(cell[0] + 0.5, cell[1] + 0.5)

    def free_cells(self) -> Iterator[Cell]:
        for iy in range(self.height):
            for ix in range(self.width):
                if self.cells[iy * self.width + ix] == CellKind.FREE:
                    yield (ix, iy)


def raycast(grid: GridMap, frm: Point, to: Point, height: RayHeight) -> RayHit:
    """Walk the exact cells crossed by the segment frm -> to.

    Returns Clear, or Blocked with the point where the segment enters the
    first blocking cell.  A ray that starts inside a blocking cell is
    immediately blocked at `frm`.  A ray that crosses the map border is
    blocked at the border.  Segments passing exactly through a cell corner
    visit both cells adjacent to the corner, which makes the Clear/Blocked
    outcome independent of ray direction.

    Boundary conventions: a point exactly on a cell edge belongs to the
    higher-indexed cell (see cell_of), and a segment that merely ends on an
    edge does not enter the cell beyond it.  Outcome symmetry under endpoint
    swap therefore holds for endpoints strictly inside cells; endpoints
    placed exactly on edges are legal but direction-sensitive.
    """
    block_min = _BLOCKS_AT[height]
    w, h = grid.width, grid.height
    cells = grid.cells

    cx, cy = grid.cell_of(frm)
    if cells[cy * w + cx] >= block_min:
        return RayHit(True, frm, (cx, cy))

    dx = to.x - frm.x
    dy = to.y - frm.y
    if dx == 0.0 and dy == 0.0:
        return RayHit(False)

    step_x = 1 if dx > 0 else -1 if dx < 0 else 0
    step_y = 1 if dy > 0 else -1 if dy < 0 else 0
    # Parametrize the segment as frm + t * (dx, dy), t in [0, 1].  Crossing
    # parameters are recomputed from the grid line index at every step, never
    # accumulated; lattice-aligned rays then hit cell corners at exactly
    # representable t and the corner test cannot drift with ray length or
    # direction.  Two crossings closer than _CORNER_EPS count as one corner.
    kx = cx + 1 if step_x > 0 else cx
    ky = cy + 1 if step_y > 0 else cy
    t_max_x = (kx - frm.x) / dx if step_x else math.inf
    t_max_y = (ky - frm.y) / dy if step_y else math.inf

    x, y = cx, cy
    while True:
        if t_max_x < t_max_y - _CORNER_EPS:
            t = t_max_x
            if t >= 1.0:
                return RayHit(False)
            x += step_x
            kx += step_x
            t_max_x = (kx - frm.x) / dx
            entered = ((x, y),)
        elif t_max_y < t_max_x - _CORNER_EPS:
            t = t_max_y
            if t >= 1.0:
                return RayHit(False)
            y += step_y
            ky += step_y
            t_max_y = (ky - frm.y) / dy
            entered = ((x, y),)
        else:
            # Corner crossing: check both orthogonal neighbours before
            # landing in the diagonal cell.
            t = min(t_max_x, t_max_y)
            if t >= 1.0:
                return RayHit(False)
            nx, ny = x + step_x, y + step_y
            entered = ((nx, y), (x, ny), (nx, ny))
            x, y = nx, ny
            kx += step_x
            ky += step_y
            t_max_x = (kx - frm.x) / dx
            t_max_y = (ky - frm.y) / dy
        point = Point(frm.x + t * dx, frm.y + t * dy)
        for ex, ey in entered:
            if not (0 <= ex < w and 0 <= ey < h):
                return RayHit(True, point, (ex, ey))
            if cells[ey * w + ex] >= block_min:
                return RayHit(True, point, (ex, ey))


# Fixed neighbour expansion order for pathfinding: the four orthogonal steps
# east, west, south, north, then the four diagonals.  Ties in path cost are
# broken by heap insertion order, so this order is part of the contract.
_NEIGHBOURS = (
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT2),
    (1, -1, SQRT2),
    (-1, 1, SQRT2),
    (-1, -1, SQRT2),
)


def _passable(grid: GridMap, ix: int, iy: int) -> bool:
    return (
        0 <= ix < grid.width
        and 0 <= iy < grid.height
        and grid.cells[iy * grid.width + ix] != CellKind.WALL
    )


def neighbours(grid: GridMap, cell: Cell) -> Iterator[tuple[Cell, float]]:
    """8-connected moves.  LowCover is walkable; Walls are not.

    A diagonal move requires both of its orthogonal neighbours to be
    non-Wall, so paths never cut corners.
    """
    x, y = cell
    for dx, dy, cost in _NEIGHBOURS:
        nx, ny = x + dx, y + dy
        if not _passable(grid, nx, ny):
            continue
        if dx != 0 and dy != 0:
            if not (_passable(grid, x + dx, y) and _passable(grid, x, y + dy)):
                continue
        yield (nx, ny), cost


def _octile(a: Cell, b: Cell) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def find_path(grid: GridMap, frm: Point, to: Point) -> PathResult:
    """Shortest 8-connected path between the cells containing frm and to.

    Cost is 1 per orthogonal step and sqrt(2) per diagonal step.  Waypoints
    are cell centers from the start cell to the goal cell inclusive.  Start
    or goal in a Wall cell, or no route, yields NoPath.
    """
    start = grid.cell_of(frm)
    goal = grid.cell_of(to)
    if grid.kind_at(*start) == CellKind.WALL or grid.kind_at(*goal) == CellKind.WALL:
        return PathResult(False)
    if start == goal:
        return PathResult(True, (grid.cell_center(start),), 0.0)

    g_cost: dict[Cell, float] = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    counter = 0
    frontier: list[tuple[float, int, Cell]] = [(_octile(start, goal), 0, start)]
    while frontier:
        f, _, cur = heapq.heappop(frontier)
        cur_g = g_cost[cur]
        if f > cur_g + _octile(cur, goal):
            continue  # stale entry
        if cur == goal:
            cells = [cur]
            while cur != start:
                cur = parent[cur]
                cells.append(cur)
            cells.reverse()
            return PathResult(True, tuple(grid.cell_center(c) for c in cells), cur_g)
        for nxt, cost in neighbours(grid, cur):
            ng = cur_g + cost
            if ng < g_cost.get(nxt, math.inf):
                g_cost[nxt] = ng
                parent[nxt] = cur
                counter += 1
                heapq.heappush(frontier, (ng + _octile(nxt, goal), counter, nxt))
    return PathResult(False)


def distance_field(
    grid: GridMap, start: Cell, excluded: frozenset[Cell] = frozenset()
) -> tuple[dict[Cell, float], dict[Cell, Cell]]:
    """Dijkstra distances from one cell to every reachable cell.

    Shares the movement rules of find_path.  `excluded` removes cells from
    the graph entirely, which the cover-post path criterion uses to ask
    whether a shortest route can avoid a region.  Returns (distance, parent).
    """
    if not grid.in_bounds_cell(start) or grid.kind_at(*start) == CellKind.WALL:
        return {}, {}
    if start in excluded:
        return {}, {}
    dist: dict[Cell, float] = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    counter = 0
    frontier: list[tuple[float, int, Cell]] = [(0.0, 0, start)]
    while frontier:
        d, _, cur = heapq.heappop(frontier)
        if d > dist.get(cur, math.inf):
            continue
        for nxt, cost in neighbours(grid, cur):
            if nxt in excluded:
                continue
            nd = d + cost
            if nd < dist.get(nxt, math.inf):
                dist[nxt] = nd
                parent[nxt] = cur
                counter += 1
                heapq.heappush(frontier, (nd, counter, nxt))
    return dist, parent


def reconstruct_path(parent: dict[Cell, Cell], start: Cell, goal: Cell) -> list[Cell]:
    """Cells from start to goal along a parent tree produced by distance_field."""
    cells = [goal]
    cur = goal
    while cur != start:
        cur = parent[cur]
        cells.append(cur)
    cells.reverse()
    return cells


def cells_in_wedge(
    grid: GridMap, apex: Pose, half_angle: float, radius: float
) -> set[Cell]:
    """Cells whose center is inside the vision wedge and crouch-visible.

    A cell belongs to the wedge when its center is within `radius` of the
    apex, within `half_angle` of the apex heading (a center coincident with
    the apex counts as on-axis), and the crouch-height ray from the apex to
    the center is clear.  Cast at crouch height because the wedge models a
    searching gaze that LowCover does conceal.
    """
    out: set[Cell] = set()
    if radius < 0.0:
        return out
    ax, ay = apex.position
    x0 = max(0, int(math.floor(ax - radius)))
    x1 = min(grid.width - 1, int(math.floor(ax + radius)))
    y0 = max(0, int(math.floor(ay - radius)))
    y1 = min(grid.height - 1, int(math.floor(ay + radius)))
    for iy in range(y0, y1 + 1):
        for ix in range(x0, x1 + 1):
            center = Point(ix + 0.5, iy + 0.5)
            if center.dist(apex.position) > radius:
                continue
            if center != apex.position:
                if angle_diff(bearing(apex.position, center), apex.heading) > half_angle:
                    continue
            if raycast(grid, apex.position, center, RayHeight.CROUCH).blocked:
                continue
            out.add((ix, iy))
    return out
