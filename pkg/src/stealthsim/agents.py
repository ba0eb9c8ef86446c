"""NPC decision core: prioritized skills driving a behaviour stack.

Every tick an agent re-selects the highest-priority skill whose validity
predicate holds; a skill change clears the behaviour stack down to the
permanent Idle floor and pushes the new skill's root behaviour.  Behaviours
own the fine-grained work (pathing, searching, shooting) and may push and
pop freely within their skill, so the same behaviour code serves many
skills.  Exactly one action leaves the stack per tick.

The archetype table (skills, priorities, validity predicates, perception
parameters) lives in archetypes.py so tuning never touches this engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Protocol, Sequence

from .canvass import (
    CanvassGrid,
    RecencyBuffer,
    canvass_done,
    choose_and_apply,
    default_primitives,
    init_canvass,
)
from .config import Config
from .follow import (
    FollowRegion,
    FollowStage,
    ObserverView,
    TeleportRule,
    generate_follow_positions,
    teleport_check,
)
from .perception import (
    AwarenessPhase,
    AwarenessState,
    HearingModel,
    Percept,
    VisionModel,
    update_awareness,
)
from .posts import (
    PostBands,
    PostValidation,
    SELECTORS,
    SelectionContext,
    generate_posts,
    rate_posts,
    select_post,
    validate_post,
)
from .rng import Stream
from .world import (
    Cell,
    CellKind,
    GridMap,
    Point,
    Pose,
    RayHeight,
    bearing,
    distance_field,
    find_path,
    raycast,
)


class SkillId(Enum):
    CHASE = "chase"
    SEARCH = "search"
    FOLLOW = "follow"
    SLEEP = "sleep"
    WANDER = "wander"
    AMBUSH = "ambush"
    THROW = "throw"
    PANIC = "panic"
    ADVANCE = "advance"
    MELEE = "melee"
    GUN_COMBAT = "gun_combat"
    HIDE = "hide"
    INVESTIGATE = "investigate"
    SCRIPTED = "scripted"
    FLANK = "flank"


class BehaviourId(Enum):
    MOVE_TO_LOCATION = "move_to_location"
    STAND_AND_SHOOT = "stand_and_shoot"
    TAKE_COVER = "take_cover"
    CANVASS = "canvass"
    FOLLOW_PLAYER = "follow_player"
    WANDER_STEP = "wander_step"
    AMBUSH_WAIT = "ambush_wait"
    THROW_PROJECTILE = "throw_projectile"
    IDLE = "idle"


class Faction(Enum):
    INFECTED = "infected"
    HUMAN_ENEMY = "human_enemy"
    PLAYER_SIDE = "player_side"


class AttackKind(Enum):
    MELEE = "melee"
    RANGED = "ranged"


@dataclass(frozen=True)
class Attack:
    kind: AttackKind
    target: Point
    target_agent: int | None = None


@dataclass(frozen=True)
class AgentAction:
    """One tick's worth of intent from one agent.

    move_intent magnitude never exceeds the archetype speed.  emit_sound is
    loudness at the agent's own position; sound_at places a sound elsewhere
    (projectile impacts).  teleport_to is the buddy catch-up jump.
    """

    move_intent: Point = Point(0.0, 0.0)
    emit_sound: float | None = None
    sound_at: tuple[Point, float] | None = None
    attack: Attack | None = None
    teleport_to: Point | None = None


def _clamped(v: Point, speed: float) -> Point:
    mag = v.length()
    if mag <= speed or mag == 0.0:
        return v
    return v.scaled(speed / mag)


@dataclass
class BehaviourFrame:
    id: BehaviourId
    params: dict = field(default_factory=dict)


MAX_STACK_DEPTH = 4


class BehaviourStack:
    """Idle-floored stack; only the top frame acts."""

    def __init__(self) -> None:
        self._frames: list[BehaviourFrame] = [BehaviourFrame(BehaviourId.IDLE)]

    def top(self) -> BehaviourFrame:
        return self._frames[-1]

    def push(self, frame: BehaviourFrame) -> None:
        if len(self._frames) >= MAX_STACK_DEPTH:
            raise RuntimeError("behaviour stack depth exceeded")
        self._frames.append(frame)

    def pop(self) -> None:
        if len(self._frames) <= 1:
            raise RuntimeError("cannot pop the Idle floor")
        self._frames.pop()

    def clear_to_idle(self) -> None:
        del self._frames[1:]

    def ids(self) -> tuple[BehaviourId, ...]:
        return tuple(f.id for f in self._frames)

    def frames(self) -> tuple[BehaviourFrame, ...]:
        return tuple(self._frames)

    def __len__(self) -> int:
        return len(self._frames)


class ValidityPredicate(Protocol):
    def __call__(self, agent: "Agent", view: "TickView") -> bool: ...


RootParams = Callable[["Agent", "TickView"], dict]


@dataclass(frozen=True)
class SkillSpec:
    id: SkillId
    priority: int
    validity: ValidityPredicate
    root: BehaviourId
    root_params: RootParams | None = None


@dataclass(frozen=True)
class Archetype:
    kind: str
    faction: Faction
    skills: tuple[SkillSpec, ...]
    vision: VisionModel | None
    hearing: HearingModel
    move_speed: float
    footstep_loudness: float
    posts_active: Callable[["Agent", "TickView"], bool]
    armed: bool = False
    sleeping: bool = False

    def __post_init__(self) -> None:
        prios = [s.priority for s in self.skills]
        if len(set(prios)) != len(prios):
            raise ValueError(f"{self.kind}: skill priorities must be distinct")
        if not self.skills:
            raise ValueError(f"{self.kind}: at least one skill required")


@dataclass
class PostTable:
    """One tick's generated and validated posts for a posts-active agent."""

    ctx: SelectionContext
    posts: list
    validations: dict[int, PostValidation]
    ray_count: int

    def valid_posts(self, excluding: set[Cell] | None = None) -> list:
        grid = self.ctx.grid
        out = []
        for p in self.posts:
            if not self.validations[p.id].valid:
                continue
            if excluding and grid.cell_of(p.position) in excluding:
                continue
            out.append(p)
        return out

    def best_rating(self, selector_name: str) -> float:
        ratings = rate_posts(SELECTORS[selector_name], self.valid_posts(), self.ctx)
        return ratings[0].rating if ratings else 0.0


@dataclass
class PlayerView:
    pose: Pose
    stance: str = "walk"
    alive: bool = True


@dataclass
class Agent:
    id: int
    archetype: Archetype
    pose: Pose
    rng: Stream
    awareness: AwarenessState = field(
        default_factory=lambda: AwarenessState(AwarenessPhase.UNAWARE, None, 0)
    )
    stack: BehaviourStack = field(default_factory=BehaviourStack)
    skill: SkillId | None = None
    alive: bool = True
    armed: bool = False
    sleeping: bool = False
    stimulus_count: int = 0
    script: tuple[Point, ...] = ()
    script_index: int = 0
    guard_point: Point | None = None
    last_throw_tick: int = -(10**9)
    recent_post_cells: "RecencyBuffer" = field(default_factory=lambda: RecencyBuffer(4))
    post_table: PostTable | None = None
    tick_notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.armed = self.archetype.armed
        self.sleeping = self.archetype.sleeping
        if self.guard_point is None:
            self.guard_point = self.pose.position

    @property
    def kind(self) -> str:
        return self.archetype.kind

    @property
    def phase(self) -> AwarenessPhase:
        return self.awareness.phase


@dataclass
class TickView:
    """Read-only world context handed to validity predicates and behaviours."""

    grid: GridMap
    tick: int
    config: Config
    player: PlayerView
    agents: Sequence[Agent] = ()
    claimed_post_cells: set[Cell] = field(default_factory=set)

    def cfg(self, key: str) -> float:
        return self.config[key]

    def hostiles_of(self, agent: Agent) -> list[Agent]:
        """Living agents the given agent treats as enemies."""
        mine = agent.archetype.faction
        out = []
        for other in self.agents:
            if other.id == agent.id or not other.alive:
                continue
            theirs = other.archetype.faction
            if mine is Faction.INFECTED:
                hostile = theirs is not Faction.INFECTED
            elif mine is Faction.HUMAN_ENEMY:
                hostile = theirs is not Faction.HUMAN_ENEMY
            else:
                hostile = theirs is not Faction.PLAYER_SIDE
            if hostile:
                out.append(other)
        return out

    def threats_to_player_side(self) -> list[Agent]:
        return [
            a
            for a in self.agents
            if a.alive and a.archetype.faction is not Faction.PLAYER_SIDE
        ]

    def alert_infected_allies(self, agent: Agent) -> list[Agent]:
        return [
            a
            for a in self.agents
            if a.alive
            and a.id != agent.id
            and a.archetype.faction is Faction.INFECTED
            and a.phase is AwarenessPhase.ALERT
        ]

    def allies_of(self, agent: Agent) -> list[Agent]:
        return [
            a
            for a in self.agents
            if a.alive
            and a.id != agent.id
            and a.archetype.faction is agent.archetype.faction
        ]

    def player_distance(self, agent: Agent) -> float:
        return agent.pose.position.dist(self.player.pose.position)


def select_skill(archetype: Archetype, agent: Agent, view: TickView) -> SkillSpec:
    """Highest-priority skill whose validity predicate accepts right now."""
    best: SkillSpec | None = None
    for spec in archetype.skills:
        if spec.validity(agent, view):
            if best is None or spec.priority > best.priority:
                best = spec
    if best is None:
        raise RuntimeError(f"{archetype.kind}: no valid skill (missing floor)")
    return best


def apply_awareness(agent: Agent, percepts: list[Percept], lost_grace: int) -> None:
    if percepts:
        agent.stimulus_count += len(percepts)
    agent.awareness = update_awareness(agent.awareness, percepts, lost_grace)


def prepare_posts(agent: Agent, view: TickView) -> None:
    """Generate and validate this tick's posts when the archetype wants them.

    Runs before skill selection so validity predicates can compare ratings;
    rating itself costs no rays, so the whole tick stays at one 4-ray pass
    over at most 40 posts.
    """
    agent.post_table = None
    agent.tick_notes["post_rays"] = 0
    if not agent.archetype.posts_active(agent, view):
        return
    threat = _threat_position(agent, view)
    ctx = SelectionContext(
        npc=agent.pose,
        player=view.player.pose,
        grid=view.grid,
        threat=threat,
        recent_posts=agent.recent_post_cells.as_tuple(),
        allies=tuple(a.pose.position for a in view.allies_of(agent)),
        player_exclusion=view.cfg("posts.exclusion_radius"),
    )
    bands = PostBands(view.cfg("posts.ring_min"), view.cfg("posts.ring_max"))
    posts = generate_posts(
        view.grid,
        ctx,
        view.config.int_("posts.max_cover"),
        view.config.int_("posts.max_open"),
        bands,
    )
    rays = 0
    for post in posts:
        ctx.validations[post.id] = validate_post(view.grid, post, ctx)
        rays += 4
    agent.post_table = PostTable(ctx, posts, ctx.validations, rays)
    agent.tick_notes["post_rays"] = rays


def _threat_position(agent: Agent, view: TickView) -> Point:
    if agent.archetype.faction is Faction.PLAYER_SIDE:
        threats = view.threats_to_player_side()
        if threats:
            return min(
                threats,
                key=lambda a: (agent.pose.position.dist(a.pose.position), a.id),
            ).pose.position
    return view.player.pose.position


def tick_skills(agent: Agent, view: TickView) -> AgentAction:
    """Skill re-selection plus one behaviour-stack step."""
    spec = select_skill(agent.archetype, agent, view)
    if spec.id is not agent.skill:
        agent.skill = spec.id
        agent.stack.clear_to_idle()
        params = spec.root_params(agent, view) if spec.root_params else {}
        agent.stack.push(BehaviourFrame(spec.root, dict(params)))

    action: AgentAction | None = None
    for _ in range(2 * MAX_STACK_DEPTH):
        frame = agent.stack.top()
        action = _HANDLERS[frame.id](agent, view, frame)
        if action is not None:
            break
    if action is None:
        action = AgentAction()
    action = replace(
        action, move_intent=_clamped(action.move_intent, agent.archetype.move_speed)
    )
    if action.move_intent.length() > 1e-9 and action.emit_sound is None:
        action = replace(action, emit_sound=agent.archetype.footstep_loudness)
    return action


def tick_agent(
    agent: Agent, view: TickView, percepts: list[Percept], lost_grace: int | None = None
) -> AgentAction:
    """Full per-agent tick: awareness, posts, skill selection, behaviour."""
    agent.tick_notes.clear()
    grace = (
        lost_grace
        if lost_grace is not None
        else view.config.int_("perception.lost_grace")
    )
    apply_awareness(agent, percepts, grace)
    prepare_posts(agent, view)
    return tick_skills(agent, view)


# --- Behaviour handlers ----------------------------------------------------
#
# A handler returns an AgentAction to finish the tick, or None after pushing
# or popping so the dispatcher re-ticks the new top frame.

ARRIVE = 0.3


def _face(agent: Agent, target: Point) -> None:
    if target.dist(agent.pose.position) > 1e-9:
        agent.pose = Pose(agent.pose.position, bearing(agent.pose.position, target))


def _step_toward(agent: Agent, target: Point, speed: float) -> AgentAction:
    delta = target - agent.pose.position
    if delta.length() <= 1e-9:
        return AgentAction()
    _face(agent, target)
    return AgentAction(move_intent=_clamped(delta, speed))


def _near_player_cells(view: TickView) -> frozenset[Cell]:
    rho = view.cfg("posts.exclusion_radius")
    grid = view.grid
    centre = view.player.pose.position
    out = set()
    span = int(math.ceil(rho)) + 1
    px, py = grid.cell_of(centre)
    for iy in range(max(0, py - span), min(grid.height, py + span + 1)):
        for ix in range(max(0, px - span), min(grid.width, px + span + 1)):
            if centre.dist(grid.cell_center((ix, iy))) <= rho:
                out.add((ix, iy))
    return frozenset(out)


def _route_to(agent: Agent, view: TickView, target: Point, avoid_player: bool) -> list[Point]:
    grid = view.grid
    straight = raycast(grid, agent.pose.position, target, RayHeight.STAND).clear
    if straight and not avoid_player:
        return [target]
    start = grid.cell_of(agent.pose.position)
    goal = grid.cell_of(target)
    if avoid_player:
        excluded = _near_player_cells(view)
        dist, prev = distance_field(grid, start, excluded=excluded)
        if goal not in dist:
            return []
        cells = [goal]
        while cells[-1] != start:
            cells.append(prev[cells[-1]])
        cells.reverse()
        waypoints = [grid.cell_center(c) for c in cells[1:]]
    else:
        path = find_path(grid, agent.pose.position, target)
        if not path.found:
            return []
        waypoints = list(path.waypoints[1:])
    waypoints.append(target)
    return waypoints


def _resolve_target(agent: Agent, view: TickView, frame: BehaviourFrame) -> Point | None:
    mode = frame.params.get("mode", "fixed")
    if mode == "fixed":
        return frame.params.get("target")
    if mode == "player":
        return view.player.pose.position
    if mode == "focus":
        return agent.awareness.focus or frame.params.get("target")
    if mode == "focus_or_guard":
        if agent.awareness.phase is not AwarenessPhase.UNAWARE and agent.awareness.focus:
            return agent.awareness.focus
        return agent.guard_point
    if mode == "alert_ally":
        allies = view.alert_infected_allies(agent)
        if allies:
            return min(
                allies, key=lambda a: (agent.pose.position.dist(a.pose.position), a.id)
            ).pose.position
        return frame.params.get("target")
    if mode == "script":
        if agent.script_index < len(agent.script):
            return agent.script[agent.script_index]
        return None
    if mode == "flee":
        return _flee_target(agent, view, frame)
    return frame.params.get("target")


def _flee_target(agent: Agent, view: TickView, frame: BehaviourFrame) -> Point | None:
    target = frame.params.get("target")
    player = view.player.pose.position
    if (
        target is not None
        and agent.pose.position.dist(target) > ARRIVE
        and player.dist(target) > 3.0
    ):
        return target
    grid = view.grid
    cx, cy = grid.cell_of(agent.pose.position)
    best: tuple[float, int, Cell] | None = None
    for iy in range(max(0, cy - 6), min(grid.height, cy + 7)):
        for ix in range(max(0, cx - 6), min(grid.width, cx + 7)):
            if grid.kind_at(ix, iy) is not CellKind.FREE:
                continue
            centre = grid.cell_center((ix, iy))
            if not raycast(grid, agent.pose.position, centre, RayHeight.STAND).clear:
                continue
            key = (-player.dist(centre), iy * grid.width + ix, (ix, iy))
            if best is None or key < best:
                best = key
    if best is None:
        return None
    frame.params["target"] = grid.cell_center(best[2])
    return frame.params["target"]


def _tick_idle(agent: Agent, view: TickView, frame: BehaviourFrame) -> AgentAction:
    return AgentAction()


def _tick_move_to_location(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction | None:
    p = frame.params
    target = _resolve_target(agent, view, frame)
    if target is None:
        if p.get("mode") == "script":
            return AgentAction()
        if len(agent.stack) > 2:
            agent.stack.pop()
            return None
        return AgentAction()

    here = agent.pose.position
    if here.dist(target) <= p.get("arrive", ARRIVE):
        if p.get("mode") == "script":
            agent.script_index += 1
            p.pop("route", None)
            return AgentAction()
        if p.get("attack_melee") and view.player.alive:
            _face(agent, view.player.pose.position)
        if p.get("hold"):
            _face(agent, p.get("face_target") or target)
            return AgentAction()
        if len(agent.stack) > 2:
            agent.stack.pop()
            return None
        return AgentAction()

    route: list[Point] | None = p.get("route")
    goal: Point | None = p.get("route_goal")
    if route is None or goal is None or goal.dist(target) > 0.75:
        route = _route_to(agent, view, target, bool(p.get("avoid_player")))
        p["route"] = route
        p["route_goal"] = target
    while route and here.dist(route[0]) <= ARRIVE:
        route.pop(0)
    if not route:
        p.pop("route", None)
        return AgentAction()

    action = _step_toward(agent, route[0], agent.archetype.move_speed)
    if p.get("attack_melee"):
        reach = view.cfg("combat.melee_range")
        player = view.player.pose.position
        if view.player.alive and here.dist(player) <= reach:
            action = replace(
                action,
                attack=Attack(AttackKind.MELEE, player),
                emit_sound=view.cfg("combat.melee_loudness"),
            )
    return action


def _tick_wander_step(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction:
    p = frame.params
    if view.tick < p.get("resume_tick", 0):
        return AgentAction()
    target: Point | None = p.get("target")
    if target is None or agent.pose.position.dist(target) <= ARRIVE:
        if target is not None:
            p["resume_tick"] = view.tick + 10 + agent.rng.randrange(40)
            p["target"] = None
            return AgentAction()
        p["target"] = _pick_wander_target(agent, view)
        target = p["target"]
        if target is None:
            return AgentAction()
    return _step_toward(agent, target, agent.archetype.move_speed)


def _pick_wander_target(agent: Agent, view: TickView) -> Point | None:
    grid = view.grid
    for _ in range(6):
        angle = agent.rng.uniform_range(0.0, 2.0 * math.pi)
        dist = agent.rng.uniform_range(1.0, 4.0)
        candidate = agent.pose.position + Point(
            math.cos(angle) * dist, math.sin(angle) * dist
        )
        if not grid.in_bounds_point(candidate):
            continue
        cell = grid.cell_of(candidate)
        if grid.kind_at(*cell) is not CellKind.FREE:
            continue
        if raycast(grid, agent.pose.position, candidate, RayHeight.STAND).clear:
            return candidate
    return None


def _tick_canvass(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction | None:
    p = frame.params
    grid = view.grid
    if "canvass" not in p:
        focus = p.get("focus") or agent.pose.position
        p["canvass"] = init_canvass(
            grid, Pose(focus, agent.pose.heading), view.cfg("canvass.radius")
        )
        p["recency"] = RecencyBuffer(view.config.int_("canvass.recency"))
        p["primitives"] = default_primitives()
        p["pending"] = None
    canvass: CanvassGrid = p["canvass"]
    agent.tick_notes["canvass_unseen"] = canvass.unseen_count()

    pending: Pose | None = p["pending"]
    if pending is not None:
        if agent.pose.position.dist(pending.position) <= 0.15:
            agent.pose = Pose(agent.pose.position, pending.heading)
            p["pending"] = None
        else:
            return _step_toward(agent, pending.position, agent.archetype.move_speed)

    if canvass_done(canvass, grid, agent.pose, p["primitives"]):
        # Search exhausted with nothing found: the agent gives up and drops
        # back to its unaware floor; the perception machine itself never
        # leaves Searching without a stimulus.
        if agent.phase is AwarenessPhase.SEARCHING:
            agent.awareness = AwarenessState(AwarenessPhase.UNAWARE, None, 0)
        agent.stack.pop()
        return None

    step = choose_and_apply(canvass, grid, agent.pose, p["primitives"], p["recency"])
    agent.tick_notes["canvass_unseen"] = canvass.unseen_count()
    if step.stalled:
        agent.pose = Pose(agent.pose.position, step.pose.heading)
        return AgentAction()
    if agent.pose.position.dist(step.pose.position) <= 1e-9:
        agent.pose = Pose(agent.pose.position, step.pose.heading)
        return AgentAction()
    p["pending"] = step.pose
    return _step_toward(agent, step.pose.position, agent.archetype.move_speed)


def _tick_follow_player(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction:
    p = frame.params
    cfg = view.cfg
    player = view.player.pose
    anchor: Point | None = p.get("anchor")
    need = (
        anchor is None
        or player.position.dist(anchor) > cfg("follow.anchor_break")
        or (p.get("target") is None and p.get("accepted", 0) == 0)
    )
    if need:
        region = FollowRegion(
            r_min=cfg("follow.r_min"),
            r_max=cfg("follow.r_max"),
        )
        candidates = generate_follow_positions(
            view.grid,
            player,
            region,
            n_rays=view.config.int_("follow.n_rays"),
            forward_len=cfg("follow.forward_len"),
            buddy=agent.pose.position,
        )
        accepted = [c for c in candidates if c.stage_reached is FollowStage.ACCEPTED]
        agent.tick_notes["follow_candidates"] = len(accepted)
        p["anchor"] = player.position
        p["accepted"] = len(accepted)
        p["target"] = accepted[0].position if accepted else None

    if p.get("accepted", 0) == 0:
        p["no_pos_ticks"] = p.get("no_pos_ticks", 0) + 1
        rule = TeleportRule(
            patience_ticks=view.config.int_("follow.teleport_patience"),
            min_path_dist=cfg("follow.teleport_min_path"),
        )
        observers = [
            ObserverView(a.pose, a.archetype.vision)
            for a in view.threats_to_player_side()
        ]
        observers.append(ObserverView(player, _player_vision()))
        spot = teleport_check(
            view.grid,
            agent.pose.position,
            player,
            accepted_count=0,
            ticks_without_position=p["no_pos_ticks"],
            observer_views=observers,
            rule=rule,
        )
        if spot is not None:
            p["no_pos_ticks"] = 0
            p["anchor"] = None
            agent.tick_notes["teleported"] = True
            return AgentAction(teleport_to=spot)
        return AgentAction()

    p["no_pos_ticks"] = 0
    target: Point = p["target"]
    if agent.pose.position.dist(target) <= ARRIVE:
        _face(agent, player.position)
        return AgentAction()
    if raycast(view.grid, agent.pose.position, target, RayHeight.STAND).clear:
        return _step_toward(agent, target, agent.archetype.move_speed)
    path = find_path(view.grid, agent.pose.position, target)
    if not path.found or len(path.waypoints) < 2:
        return AgentAction()
    return _step_toward(agent, path.waypoints[1], agent.archetype.move_speed)


_PLAYER_VISION: VisionModel | None = None


def _player_vision() -> VisionModel:
    global _PLAYER_VISION
    if _PLAYER_VISION is None:
        from .perception import MultiCone

        _PLAYER_VISION = MultiCone.default()
    return _PLAYER_VISION


def _tick_take_cover(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction | None:
    p = frame.params
    table = agent.post_table
    if table is None:
        return AgentAction()
    selector = SELECTORS[p.get("selector", "take-cover")]
    candidates = table.valid_posts(excluding=view.claimed_post_cells)
    ratings = rate_posts(selector, candidates, table.ctx)
    chosen = select_post(ratings)
    agent.tick_notes["chosen_post_id"] = chosen
    if chosen is None:
        return AgentAction()
    post = next(q for q in table.posts if q.id == chosen)
    cell = view.grid.cell_of(post.position)
    view.claimed_post_cells.add(cell)

    here = agent.pose.position
    if here.dist(post.position) <= ARRIVE:
        if cell not in agent.recent_post_cells:
            agent.recent_post_cells.push(cell)
        if p.get("hold") == "shoot":
            agent.stack.push(BehaviourFrame(BehaviourId.STAND_AND_SHOOT))
            return None
        _face(agent, table.ctx.threat or view.player.pose.position)
        return AgentAction()
    agent.stack.push(
        BehaviourFrame(
            BehaviourId.MOVE_TO_LOCATION,
            {"mode": "fixed", "target": post.position, "avoid_player": True},
        )
    )
    return None


def _tick_stand_and_shoot(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction | None:
    player = view.player.pose.position
    dist = view.player_distance(agent)
    clear = raycast(view.grid, agent.pose.position, player, RayHeight.STAND).clear
    if not view.player.alive or not clear or dist > view.cfg("combat.gun_range"):
        agent.stack.pop()
        return None
    _face(agent, player)
    cooldown = view.config.int_("combat.gun_cooldown")
    last = frame.params.get("last_shot", -(10**9))
    if view.tick - last >= cooldown:
        frame.params["last_shot"] = view.tick
        return AgentAction(
            emit_sound=view.cfg("combat.gun_loudness"),
            attack=Attack(AttackKind.RANGED, player),
        )
    return AgentAction()


def _tick_ambush_wait(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction:
    focus = agent.awareness.focus
    if focus is not None:
        _face(agent, focus)
    return AgentAction()


def _tick_throw_projectile(
    agent: Agent, view: TickView, frame: BehaviourFrame
) -> AgentAction:
    player = view.player.pose.position
    agent.last_throw_tick = view.tick
    _face(agent, player)
    return AgentAction(
        attack=Attack(AttackKind.RANGED, player),
        sound_at=(player, view.cfg("combat.throw_loudness")),
    )


_HANDLERS: dict[BehaviourId, Callable] = {
    BehaviourId.IDLE: _tick_idle,
    BehaviourId.MOVE_TO_LOCATION: _tick_move_to_location,
    BehaviourId.STAND_AND_SHOOT: _tick_stand_and_shoot,
    BehaviourId.TAKE_COVER: _tick_take_cover,
    BehaviourId.CANVASS: _tick_canvass,
    BehaviourId.FOLLOW_PLAYER: _tick_follow_player,
    BehaviourId.WANDER_STEP: _tick_wander_step,
    BehaviourId.AMBUSH_WAIT: _tick_ambush_wait,
    BehaviourId.THROW_PROJECTILE: _tick_throw_projectile,
}
