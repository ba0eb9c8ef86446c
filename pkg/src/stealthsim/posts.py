"""Tactical posts: generation, 4-ray validation, criterion products, selection.

A post is a candidate cell to fight or hide from.  Cover posts hug the far
side of walls and low cover near the NPC; open posts ring the player.  Each
post gets exactly four validation rays, so the stock 20 + 20 posts cost a
fixed 160 rays per NPC per tick.  Valid posts are rated by a selector, a
named list of criteria whose outputs in [0, 1] multiply into the rating, so
any single zero criterion vetoes a post.  Highest rating wins, lowest id on
ties, and a squad never doubles up on a cell in the same tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .rng import Stream
from .world import (
    Cell,
    CellKind,
    GridMap,
    Point,
    Pose,
    RayHeight,
    angle_diff,
    bearing,
    distance_field,
    raycast,
)


class PostKind(Enum):
    COVER = "cover"
    OPEN = "open"


@dataclass(frozen=True)
class Post:
    id: int
    position: Point
    kind: PostKind
    cover_normal: Point | None = None
    source_cover: CellKind | None = None


class RayOutcome(Enum):
    CLEAR = "clear"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class ValidationRay:
    purpose: str
    height: RayHeight
    outcome: RayOutcome


@dataclass(frozen=True)
class PostValidation:
    """Outcome of the four fixed-purpose rays for one post.

    valid is the semantic verdict the AI acts on; literal_valid is the
    recorded any-ray-clear reading kept for audit comparison.
    """

    rays: tuple[ValidationRay, ValidationRay, ValidationRay, ValidationRay]
    valid: bool
    literal_valid: bool


@dataclass
class SelectionContext:
    """Everything criteria may consult while rating one NPC's posts.

    recent_posts holds recently used post cells (ids are reassigned every
    generation round, cells are stable).  Path lengths from the NPC are
    computed lazily once and shared by every criterion in the round.
    """

    npc: Pose
    player: Pose
    grid: GridMap
    threat: Point | None = None
    recent_posts: tuple[Cell, ...] = ()
    allies: tuple[Point, ...] = ()
    rng: Stream | None = None
    validations: dict[int, PostValidation] = field(default_factory=dict)
    player_exclusion: float = 2.0
    _plain_dist: dict[Cell, float] | None = field(default=None, repr=False)
    _avoiding_dist: dict[Cell, float] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.threat is None:
            self.threat = self.player.position

    def path_length(self, cell: Cell) -> float:
        """Shortest walk from the NPC to the cell, inf when unreachable."""
        if self._plain_dist is None:
            dist, _ = distance_field(self.grid, self.grid.cell_of(self.npc.position))
            self._plain_dist = dist
        return self._plain_dist.get(cell, math.inf)

    def path_length_avoiding_player(self, cell: Cell) -> float:
        """Same walk but barred from cells near the player."""
        if self._avoiding_dist is None:
            near = frozenset(
                (ix, iy)
                for ix in range(self.grid.width)
                for iy in range(self.grid.height)
                if self.player.position.dist(self.grid.cell_center((ix, iy)))
                <= self.player_exclusion
            )
            dist, _ = distance_field(
                self.grid, self.grid.cell_of(self.npc.position), excluded=near
            )
            self._avoiding_dist = dist
        return self._avoiding_dist.get(cell, math.inf)


_ORTHO = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class PostBands:
    """Geometry defaults for generation: the open-post ring around the player."""

    ring_min: float = 2.0
    ring_max: float = 5.0


def generate_posts(
    grid: GridMap,
    ctx: SelectionContext,
    max_cover: int = 20,
    max_open: int = 20,
    bands: PostBands = PostBands(),
) -> list[Post]:
    """Cover posts near the NPC, then open posts around the player.

    A cover post is a free cell orthogonally next to a Wall or LowCover
    cell whose outward normal (cover -> post) points away from the threat;
    when several covers adjoin, the most protective normal speaks for the
    post.  Both groups are ordered nearest-to-NPC first with the cell index
    breaking ties, truncated to their caps, and numbered sequentially.
    No raycasts are spent here.
    """
    assert ctx.threat is not None
    cover_entries: list[tuple[float, int, Cell, Point, CellKind]] = []
    for cell in grid.free_cells():
        centre = grid.cell_center(cell)
        to_threat = ctx.threat - centre
        norm = to_threat.length()
        best: tuple[float, Point, CellKind] | None = None
        for dx, dy in _ORTHO:
            kind = grid.kind_at(cell[0] + dx, cell[1] + dy)
            if kind is CellKind.FREE:
                continue
            if not grid.in_bounds_cell((cell[0] + dx, cell[1] + dy)):
                continue
            normal = Point(float(-dx), float(-dy))
            dot = (
                (normal.x * to_threat.x + normal.y * to_threat.y) / norm
                if norm > 0.0
                else 1.0
            )
            if best is None or dot < best[0]:
                best = (dot, normal, kind)
        if best is not None and best[0] < 0.0:
            index = cell[1] * grid.width + cell[0]
            cover_entries.append(
                (ctx.npc.position.dist(centre), index, cell, best[1], best[2])
            )
    cover_entries.sort(key=lambda e: (e[0], e[1]))

    posts: list[Post] = []
    taken: set[Cell] = set()
    for _, _, cell, normal, kind in cover_entries[:max_cover]:
        posts.append(
            Post(len(posts), grid.cell_center(cell), PostKind.COVER, normal, kind)
        )
        taken.add(cell)

    open_entries: list[tuple[float, int, Cell]] = []
    for cell in grid.free_cells():
        if cell in taken:
            continue
        centre = grid.cell_center(cell)
        ring = ctx.player.position.dist(centre)
        if bands.ring_min <= ring <= bands.ring_max:
            open_entries.append(
                (ctx.npc.position.dist(centre), cell[1] * grid.width + cell[0], cell)
            )
    open_entries.sort(key=lambda e: (e[0], e[1]))
    for _, _, cell in open_entries[:max_open]:
        posts.append(Post(len(posts), grid.cell_center(cell), PostKind.OPEN))
    return posts


def validate_post(grid: GridMap, post: Post, ctx: SelectionContext) -> PostValidation:
    """Cast the four fixed rays and apply both verdicts.

    Cover posts must be reachable, shielded at crouch and able to return
    fire standing; open posts must be reachable with a crouch line to the
    threat.  The literal any-ray-clear verdict is recorded alongside.
    """
    assert ctx.threat is not None
    threat = ctx.threat
    outcomes: list[ValidationRay] = []

    def cast(purpose: str, frm: Point, to: Point, height: RayHeight) -> bool:
        clear = raycast(grid, frm, to, height).clear
        outcomes.append(
            ValidationRay(purpose, height, RayOutcome.CLEAR if clear else RayOutcome.BLOCKED)
        )
        return clear

    threat_stand = cast("threat_stand", post.position, threat, RayHeight.STAND)
    threat_crouch = cast("threat_crouch", post.position, threat, RayHeight.CROUCH)
    approach = cast("approach", ctx.npc.position, post.position, RayHeight.CROUCH)
    if post.kind is PostKind.COVER:
        assert post.cover_normal is not None
        peek = post.position + post.cover_normal.scaled(0.5)
        cast("exposure", peek, threat, RayHeight.CROUCH)
        valid = approach and not threat_crouch and threat_stand
    else:
        cast("exposure", post.position, threat, RayHeight.CROUCH)
        valid = approach and threat_crouch

    rays = (outcomes[0], outcomes[1], outcomes[2], outcomes[3])
    literal = any(r.outcome is RayOutcome.CLEAR for r in rays)
    return PostValidation(rays, valid, literal)


RAYS_PER_POST = 4


Criterion = Callable[[Post, SelectionContext], float]


def criterion_distance_band_to_threat(post: Post, ctx: SelectionContext) -> float:
    """Full marks inside the preferred engagement band, fading outside it."""
    assert ctx.threat is not None
    d = post.position.dist(ctx.threat)
    lo, hi, falloff = 4.0, 9.0, 6.0
    gap = lo - d if d < lo else d - hi if d > hi else 0.0
    return max(0.0, 1.0 - gap / falloff)


def criterion_cover_from_threat(post: Post, ctx: SelectionContext) -> float:
    """Crouch protection: real cover or nothing, so coverless maps veto it."""
    return 1.0 if post.kind is PostKind.COVER else 0.0


def criterion_static_pathfind_not_near_player(post: Post, ctx: SelectionContext) -> float:
    """1.0 when some shortest route to the post keeps clear of the player.

    The post fails when it is unreachable, or when every shortest path is
    forced through the player's exclusion radius: avoiding the player must
    not cost any extra distance.
    """
    cell = ctx.grid.cell_of(post.position)
    plain = ctx.path_length(cell)
    if math.isinf(plain):
        return 0.0
    avoiding = ctx.path_length_avoiding_player(cell)
    return 1.0 if abs(avoiding - plain) <= 1e-9 else 0.0


def criterion_not_recently_used(post: Post, ctx: SelectionContext) -> float:
    cell = ctx.grid.cell_of(post.position)
    return 0.3 if cell in ctx.recent_posts else 1.0


def criterion_line_of_fire_available(post: Post, ctx: SelectionContext) -> float:
    """Standing shot possible, judged from the recorded threat_stand ray."""
    validation = ctx.validations.get(post.id)
    if validation is None:
        return 0.0
    return 1.0 if validation.rays[0].outcome is RayOutcome.CLEAR else 0.0


def criterion_flank_angle(post: Post, ctx: SelectionContext) -> float:
    """How far around the threat the post sits, relative to the NPC's side."""
    assert ctx.threat is not None
    if ctx.threat == post.position or ctx.threat == ctx.npc.position:
        return 0.0
    spread = angle_diff(
        bearing(ctx.threat, ctx.npc.position), bearing(ctx.threat, post.position)
    )
    return spread / math.pi


def criterion_ally_separation(post: Post, ctx: SelectionContext) -> float:
    """Spacing from the nearest ally, saturating at 3 units."""
    if not ctx.allies:
        return 1.0
    nearest = min(post.position.dist(a) for a in ctx.allies)
    return min(1.0, nearest / 3.0)


def criterion_approach_short(post: Post, ctx: SelectionContext) -> float:
    """Cheap-to-reach posts score high; unreachable ones zero."""
    walk = ctx.path_length(ctx.grid.cell_of(post.position))
    if math.isinf(walk):
        return 0.0
    return max(0.0, 1.0 - walk / 15.0)


CRITERIA: dict[str, Criterion] = {
    "distance-band-to-threat": criterion_distance_band_to_threat,
    "cover-from-threat": criterion_cover_from_threat,
    "path-not-near-player": criterion_static_pathfind_not_near_player,
    "not-recently-used": criterion_not_recently_used,
    "line-of-fire-available": criterion_line_of_fire_available,
    "flank-angle": criterion_flank_angle,
    "ally-separation": criterion_ally_separation,
    "approach-short": criterion_approach_short,
}


@dataclass(frozen=True)
class PostSelector:
    name: str
    criteria: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.criteria:
            raise ValueError(f"selector {self.name} has no criteria")
        unknown = [c for c in self.criteria if c not in CRITERIA]
        if unknown:
            raise ValueError(f"selector {self.name}: unknown criteria {unknown}")


SELECTORS: dict[str, PostSelector] = {
    s.name: s
    for s in (
        PostSelector(
            "take-cover",
            (
                "cover-from-threat",
                "distance-band-to-threat",
                "path-not-near-player",
                "not-recently-used",
                "line-of-fire-available",
                "approach-short",
            ),
        ),
        PostSelector(
            "flank",
            (
                "flank-angle",
                "path-not-near-player",
                "distance-band-to-threat",
                "ally-separation",
                "approach-short",
            ),
        ),
        PostSelector(
            "advance",
            ("approach-short", "line-of-fire-available", "path-not-near-player"),
        ),
        PostSelector(
            "hide",
            ("cover-from-threat", "path-not-near-player", "not-recently-used"),
        ),
        PostSelector(
            "investigate",
            ("approach-short", "path-not-near-player", "not-recently-used"),
        ),
    )
}


@dataclass(frozen=True)
class PostRating:
    post_id: int
    rating: float
    values: tuple[float, ...]


def rate_posts(
    selector: PostSelector, posts: list[Post], ctx: SelectionContext
) -> list[PostRating]:
    """Product of criterion values per post, best first, low id on ties."""
    ratings: list[PostRating] = []
    for post in posts:
        values = tuple(CRITERIA[name](post, ctx) for name in selector.criteria)
        rating = 1.0
        for v in values:
            rating *= v
        ratings.append(PostRating(post.id, rating, values))
    ratings.sort(key=lambda r: (-r.rating, r.post_id))
    return ratings


def select_post(ratings: list[PostRating]) -> int | None:
    """Top-rated post id, or None when nothing scored above zero."""
    if ratings and ratings[0].rating > 0.0:
        return ratings[0].post_id
    return None


@dataclass(frozen=True)
class PostRound:
    """One NPC's full post pipeline result for a tick."""

    posts: tuple[Post, ...]
    ratings: tuple[PostRating, ...]
    chosen_id: int | None
    ray_count: int


def run_post_round(
    grid: GridMap,
    ctx: SelectionContext,
    selector: PostSelector,
    claimed_cells: set[Cell],
    max_cover: int = 20,
    max_open: int = 20,
    bands: PostBands = PostBands(),
) -> PostRound:
    """Generate, validate, rate and pick, honouring squad cell claims.

    claimed_cells carries cells already taken by teammates this tick; the
    chosen post's cell is added so no two NPCs converge on one spot.
    """
    posts = generate_posts(grid, ctx, max_cover, max_open, bands)
    ray_count = 0
    for post in posts:
        ctx.validations[post.id] = validate_post(grid, post, ctx)
        ray_count += RAYS_PER_POST
    candidates = [
        p
        for p in posts
        if ctx.validations[p.id].valid and grid.cell_of(p.position) not in claimed_cells
    ]
    ratings = rate_posts(selector, candidates, ctx)
    chosen = select_post(ratings)
    if chosen is not None:
        chosen_post = next(p for p in posts if p.id == chosen)
        claimed_cells.add(grid.cell_of(chosen_post.position))
    return PostRound(tuple(posts), tuple(ratings), chosen, ray_count)
