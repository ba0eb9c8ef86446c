"""Vision cones, hearing and the awareness state machine.

Two vision models share one `can_see` entry point.  The classic approach is
a handful of fixed cones (normal, focused, peripheral, close) checked side
by side; the continuous model replaces the stack with a single rule where
the half-angle of view narrows with distance.  Anything nearby is caught at
a wide angle and anything far away only straight ahead, so one curve covers
what the four cones approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .world import GridMap, Point, Pose, RayHeight, angle_diff, bearing, raycast


@dataclass(frozen=True)
class InverseDistanceCone:
    """Vision whose half-angle shrinks as k / distance.

    theta_max caps the half-angle, d_close is the range inside which the cap
    always applies, r_max is the hard sight limit.
    """

    theta_max: float
    k: float
    d_close: float
    r_max: float

    def __post_init__(self) -> None:
        if not (0.0 < self.theta_max <= math.pi):
            raise ValueError(f"theta_max out of range: {self.theta_max}")
        if self.k <= 0.0:
            raise ValueError("k must be positive")
        if not (self.r_max > self.d_close > 0.0):
            raise ValueError("need r_max > d_close > 0")


def half_angle(model: InverseDistanceCone, d: float) -> float:
    """Half-angle of view at distance d.  Zero beyond r_max, capped near."""
    if d > model.r_max:
        return 0.0
    if d <= model.d_close:
        return model.theta_max
    return min(model.theta_max, model.k / d)


@dataclass(frozen=True)
class VisionCone:
    """One fixed cone of a MultiCone set."""

    name: str
    half_angle: float
    range: float


_CONE_NAMES = ("normal", "focused", "peripheral", "close")


@dataclass(frozen=True)
class MultiCone:
    """A set of named fixed cones; a target inside any one of them is seen.

    The stock loadout is the four cones named in _CONE_NAMES.  Reduced sets
    (down to a single cone) are legal so experiments can isolate one cone,
    but names must come from the stock vocabulary and not repeat.
    """

    cones: tuple[VisionCone, ...]

    def __post_init__(self) -> None:
        if not self.cones:
            raise ValueError("MultiCone needs at least one cone")
        names = [c.name for c in self.cones]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate cone names: {names}")
        unknown = set(names) - set(_CONE_NAMES)
        if unknown:
            raise ValueError(f"unknown cone names: {sorted(unknown)}")

    @property
    def r_max(self) -> float:
        return max(c.range for c in self.cones)

    @staticmethod
    def default() -> "MultiCone":
        return MultiCone(
            (
                VisionCone("normal", math.radians(30.0), 10.0),
                VisionCone("focused", math.radians(15.0), 14.0),
                VisionCone("peripheral", math.radians(80.0), 4.0),
                VisionCone("close", math.radians(180.0), 1.5),
            )
        )


VisionModel = InverseDistanceCone | MultiCone


def can_see(
    model: VisionModel, grid: GridMap, observer: Pose, target: Point
) -> bool:
    """True when the target point falls inside the model and stand-height
    line of sight is clear.  A target at the observer's own position is
    on-axis by convention."""
    d = observer.position.dist(target)
    if d > 0.0:
        offset = angle_diff(bearing(observer.position, target), observer.heading)
    else:
        offset = 0.0

    match model:
        case InverseDistanceCone():
            if d > model.r_max:
                return False
            if offset > half_angle(model, d):
                return False
        case MultiCone():
            if not any(d <= c.range and offset <= c.half_angle for c in model.cones):
                return False
    return raycast(grid, observer.position, target, RayHeight.STAND).clear


@dataclass(frozen=True)
class SoundEvent:
    position: Point
    loudness: float
    tick: int
    source_id: int


@dataclass(frozen=True)
class HearingModel:
    """Threshold hearing with flat occlusion.

    A sound is heard when loudness, divided by distance and damped by the
    occlusion factor if stand-height line of sight is blocked, still reaches
    the threshold.  Lower thresholds mean sharper ears.
    """

    threshold: float
    occlusion_factor: float = 0.5

    def __post_init__(self) -> None:
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if not (0.0 < self.occlusion_factor <= 1.0):
            raise ValueError("occlusion factor must be in (0, 1]")


class PerceptKind(Enum):
    SIGHT = "sight"
    SOUND = "sound"


@dataclass(frozen=True)
class Percept:
    kind: PerceptKind
    position: Point
    tick: int


def hear(
    model: HearingModel, grid: GridMap, listener: Point, events: list[SoundEvent]
) -> list[Percept]:
    """Percepts for every event loud enough at the listener, input order kept."""
    out: list[Percept] = []
    for ev in events:
        d = listener.dist(ev.position)
        occluded = raycast(grid, listener, ev.position, RayHeight.STAND).blocked
        factor = model.occlusion_factor if occluded else 1.0
        if ev.loudness * factor / max(d, 0.001) >= model.threshold:
            out.append(Percept(PerceptKind.SOUND, ev.position, ev.tick))
    return out


class AwarenessPhase(Enum):
    UNAWARE = "unaware"
    SUSPICIOUS = "suspicious"
    ALERT = "alert"
    SEARCHING = "searching"


@dataclass(frozen=True)
class AwarenessState:
    phase: AwarenessPhase = AwarenessPhase.UNAWARE
    focus: Point | None = None
    ticks_since_stimulus: int = 0


def update_awareness(
    state: AwarenessState, percepts: list[Percept], lost_grace: int
) -> AwarenessState:
    """Advance the awareness machine by one tick.

    Sight wins over sound and always alerts, taking the newest sighting as
    focus.  Sound makes the unaware suspicious and re-aims anyone who is not
    alert; it never downgrades an alert agent.  Silence decays Alert into
    Searching and Suspicious into Unaware once the grace period runs out.
    Searching never times out here; leaving it is the search skill's call.
    """
    sights = [p for p in percepts if p.kind is PerceptKind.SIGHT]
    if sights:
        return AwarenessState(AwarenessPhase.ALERT, sights[-1].position, 0)

    sounds = [p for p in percepts if p.kind is PerceptKind.SOUND]
    if sounds:
        pos = sounds[-1].position
        match state.phase:
            case AwarenessPhase.UNAWARE | AwarenessPhase.SUSPICIOUS:
                return AwarenessState(AwarenessPhase.SUSPICIOUS, pos, 0)
            case AwarenessPhase.SEARCHING:
                return AwarenessState(AwarenessPhase.SEARCHING, pos, 0)
            case AwarenessPhase.ALERT:
                return AwarenessState(AwarenessPhase.ALERT, pos, 0)

    ticks = state.ticks_since_stimulus + 1
    match state.phase:
        case AwarenessPhase.UNAWARE:
            return state
        case AwarenessPhase.SUSPICIOUS:
            if ticks > lost_grace:
                return AwarenessState(AwarenessPhase.UNAWARE, None, 0)
            return replace(state, ticks_since_stimulus=ticks)
        case AwarenessPhase.ALERT:
            if ticks > lost_grace:
                return AwarenessState(AwarenessPhase.SEARCHING, state.focus, 0)
            return replace(state, ticks_since_stimulus=ticks)
        case AwarenessPhase.SEARCHING:
            return replace(state, ticks_since_stimulus=ticks)
    raise AssertionError(f"unhandled phase {state.phase}")
