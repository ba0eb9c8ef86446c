"""Companion follow positions: three raycast stages and a stealth teleport.

A follow position must survive three line-of-sight contracts.  Stage A rays
fan out from the player over the follow arc and drop a candidate just short
of whatever they hit.  Stage B checks the candidate can also reach a point
forward_len along the player's heading, so it stays usable as the player
keeps moving.  Stage C closes the triangle: the player must reach that same
forward point.  Only candidates passing all three are offered to the buddy;
the rest are kept with the stage they failed so the overlay can show why.

When nothing passes for a long time and the buddy is far away, a teleport
target may be issued, but never to a cell any observer can currently see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .perception import VisionModel, can_see
from .world import (
    GridMap,
    Point,
    Pose,
    RayHeight,
    angle_diff,
    find_path,
    normalize_angle,
    raycast,
    unit_vector,
)


@dataclass(frozen=True)
class FollowRegion:
    """Annulus sector around the player where follow positions may lie."""

    r_min: float = 1.5
    r_max: float = 3.5
    arc_center: float = math.pi
    arc_half_width: float = math.pi / 2

    def __post_init__(self) -> None:
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if not (0.0 < self.arc_half_width <= math.pi):
            raise ValueError("arc_half_width must be in (0, pi]")


class FollowStage(Enum):
    A = "A"
    B = "B"
    C = "C"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class FollowCandidate:
    position: Point
    forward_point: Point
    score: float
    stage_reached: FollowStage
    bearing_index: int


@dataclass(frozen=True)
class FollowScoreParams:
    """Weights and shape constants for candidate scoring."""

    w_ideal: float = 1.0
    w_travel: float = 1.0
    w_behind: float = 1.0
    ideal_dist: float = 2.5
    ideal_falloff: float = 4.0
    travel_falloff: float = 8.0


_PULLBACK = 0.25


def score_candidate(
    candidate: FollowCandidate,
    player: Pose,
    buddy: Point,
    params: FollowScoreParams = FollowScoreParams(),
) -> float:
    """Weighted sum of three unit terms: near the ideal spot, cheap to
    reach from the buddy's current position, and behind the player."""
    rear = normalize_angle(player.heading + math.pi)
    ideal = player.position + unit_vector(rear).scaled(params.ideal_dist)
    closeness = max(0.0, 1.0 - candidate.position.dist(ideal) / params.ideal_falloff)
    travel = max(0.0, 1.0 - candidate.position.dist(buddy) / params.travel_falloff)
    off_rear = angle_diff(
        math.atan2(
            candidate.position.y - player.position.y,
            candidate.position.x - player.position.x,
        ),
        rear,
    )
    behindness = 1.0 - off_rear / math.pi
    return (
        params.w_ideal * closeness
        + params.w_travel * travel
        + params.w_behind * behindness
    )


def generate_follow_positions(
    grid: GridMap,
    player: Pose,
    region: FollowRegion,
    n_rays: int,
    forward_len: float,
    buddy: Point,
    params: FollowScoreParams = FollowScoreParams(),
) -> list[FollowCandidate]:
    """Run the three stages and return every ray's candidate.

    Accepted candidates come first, sorted by score descending with ties on
    bearing index; failed ones follow in bearing order with score 0 and the
    stage that rejected them.  All rays run at crouch height.
    """
    if n_rays < 4:
        raise ValueError("need at least 4 rays")
    heading_fwd = unit_vector(player.heading)
    accepted: list[FollowCandidate] = []
    failed: list[FollowCandidate] = []
    span = 2.0 * region.arc_half_width
    for i in range(n_rays):
        bearing = player.heading + region.arc_center - region.arc_half_width
        bearing += span * i / (n_rays - 1)
        direction = unit_vector(bearing)
        far = player.position + direction.scaled(region.r_max)
        hit = raycast(grid, player.position, far, RayHeight.CROUCH)
        if hit.blocked:
            dist = max(0.0, player.position.dist(hit.hit_point) - _PULLBACK)
        else:
            dist = region.r_max
        dist = min(region.r_max, dist)
        position = player.position + direction.scaled(dist)
        forward_point = position + heading_fwd.scaled(forward_len)
        if dist < region.r_min:
            failed.append(FollowCandidate(position, forward_point, 0.0, FollowStage.A, i))
            continue
        if raycast(grid, position, forward_point, RayHeight.CROUCH).blocked:
            failed.append(FollowCandidate(position, forward_point, 0.0, FollowStage.B, i))
            continue
        if raycast(grid, player.position, forward_point, RayHeight.CROUCH).blocked:
            failed.append(FollowCandidate(position, forward_point, 0.0, FollowStage.C, i))
            continue
        probe = FollowCandidate(position, forward_point, 0.0, FollowStage.ACCEPTED, i)
        accepted.append(
            FollowCandidate(
                position,
                forward_point,
                score_candidate(probe, player, buddy, params),
                FollowStage.ACCEPTED,
                i,
            )
        )
    accepted.sort(key=lambda c: (-c.score, c.bearing_index))
    return accepted + failed


@dataclass(frozen=True)
class ObserverView:
    """One agent's eyes for the teleport invisibility audit."""

    pose: Pose
    model: VisionModel | None


@dataclass(frozen=True)
class TeleportRule:
    patience_ticks: int = 90
    min_path_dist: float = 12.0


def teleport_check(
    grid: GridMap,
    buddy: Point,
    player: Pose,
    accepted_count: int,
    ticks_without_position: int,
    observer_views: list[ObserverView],
    rule: TeleportRule = TeleportRule(),
) -> Point | None:
    """Last-resort relocation target, or None while any gate holds.

    Fires only when no follow position has existed for the full patience
    window, the buddy's walking distance to the player exceeds the rule's
    threshold (no path counts as infinite), and some free cell near the
    player is outside the current vision of every observer.  The caller
    passes the player's own view among the observers; the player must not
    witness the jump either.
    """
    if accepted_count > 0 or ticks_without_position < rule.patience_ticks:
        return None
    path = find_path(grid, buddy, player.position)
    walk = path.length if path.found else math.inf
    if walk <= rule.min_path_dist:
        return None
    here = grid.cell_of(buddy)
    ranked = sorted(
        (c for c in grid.free_cells() if c != here),
        key=lambda c: (player.position.dist(grid.cell_center(c)), c[1] * grid.width + c[0]),
    )
    for cell in ranked:
        target = grid.cell_center(cell)
        if all(
            view.model is None or not can_see(view.model, grid, view.pose, target)
            for view in observer_views
        ):
            return target
    return None
