"""Deterministic tick loop: input, perception, decisions, resolution, trace.

Every tick runs six phases in a fixed order: (1) player input is applied
and the player's movement noise is emitted, (2) percepts are computed for
all agents in id order, (3) awareness machines advance, (4) skills are
re-selected and behaviour stacks tick in id order, (5) actions resolve
(movement with wall clipping, attacks, sound emission), (6) a trace record
is appended.  Sounds propagate with one tick of latency: everything heard
in phase 2 was emitted during the previous tick.  Sight is same-tick.

The trace is line-delimited JSON.  The first line is a header carrying the
scenario text and the effective seed and config overrides, which makes a
trace file self-contained for replay; each following line is one tick's
record.  The trace hash is the sha256 of the record lines.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .agents import (
    Agent,
    AgentAction,
    Faction,
    PlayerView,
    TickView,
    apply_awareness,
    prepare_posts,
    tick_skills,
)
from .archetypes import archetype_defaults
from .config import Config
from .perception import Percept, PerceptKind, SoundEvent, can_see, hear
from .rng import derive_stream
from .scenario import Scenario, load_scenario
from .world import CellKind, GridMap, Point, Pose, bearing

PLAYER_ID = 0
STANCES = ("walk", "sneak", "sprint")


@dataclass(frozen=True)
class ThrowBrick:
    target: Point


@dataclass(frozen=True)
class AttackNpc:
    target_id: int


@dataclass(frozen=True)
class PlayerInput:
    """One tick of player intent; `move` is a unit-bounded direction."""

    move: Point = Point(0.0, 0.0)
    stance: str = "walk"
    action: ThrowBrick | AttackNpc | None = None

    def __post_init__(self) -> None:
        if self.stance not in STANCES:
            raise ValueError(f"unknown stance {self.stance!r}")

    def clamped(self) -> "PlayerInput":
        mag = self.move.length()
        if mag <= 1.0:
            return self
        return PlayerInput(self.move.scaled(1.0 / mag), self.stance, self.action)


def input_to_obj(inp: PlayerInput) -> dict:
    obj: dict = {"move": [inp.move.x, inp.move.y], "stance": inp.stance}
    if isinstance(inp.action, ThrowBrick):
        obj["action"] = {"type": "throw_brick", "target": [inp.action.target.x, inp.action.target.y]}
    elif isinstance(inp.action, AttackNpc):
        obj["action"] = {"type": "attack", "target": inp.action.target_id}
    return obj


def input_from_obj(obj: dict) -> PlayerInput:
    move = obj.get("move", [0.0, 0.0])
    action_obj = obj.get("action")
    action: ThrowBrick | AttackNpc | None = None
    if action_obj:
        if action_obj.get("type") == "throw_brick":
            tx, ty = action_obj["target"]
            action = ThrowBrick(Point(float(tx), float(ty)))
        elif action_obj.get("type") == "attack":
            action = AttackNpc(int(action_obj["target"]))
        else:
            raise ValueError(f"unknown action type {action_obj.get('type')!r}")
    return PlayerInput(
        Point(float(move[0]), float(move[1])),
        obj.get("stance", "walk"),
        action,
    )


@dataclass
class PlayerState:
    pose: Pose
    stance: str = "walk"
    alive: bool = True


@dataclass
class SimState:
    grid: GridMap
    config: Config
    player: PlayerState
    agents: list[Agent]
    tick: int = 0
    pending_sounds: list[SoundEvent] = field(default_factory=list)
    draws_seen: int = 0

    def agent_by_id(self, agent_id: int) -> Agent | None:
        for agent in self.agents:
            if agent.id == agent_id:
                return agent
        return None


def build_state(
    scenario: Scenario,
    seed: int | None = None,
    config_overrides: dict[str, float] | None = None,
) -> SimState:
    """Fresh SimState at tick 0; overrides win over the scenario header."""
    entries = dict(scenario.config_entries)
    entries.update(config_overrides or {})
    config = Config(entries)
    eff_seed = scenario.seed if seed is None else seed
    agents: list[Agent] = []
    for index, spawn in enumerate(scenario.agents):
        agent_id = index + 1
        agent = Agent(
            id=agent_id,
            archetype=archetype_defaults(spawn.kind, config),
            pose=spawn.pose,
            rng=derive_stream(eff_seed, agent_id),
        )
        armed = spawn.override("armed")
        if armed is not None:
            agent.armed = armed != 0.0
        sleeping = spawn.override("sleeping")
        if sleeping is not None:
            agent.sleeping = sleeping != 0.0
        script = spawn.override("script")
        if script:
            agent.script = tuple(script)
        agents.append(agent)
    return SimState(
        grid=scenario.grid,
        config=config,
        player=PlayerState(pose=scenario.player_spawn),
        agents=agents,
    )


def _resolve_move(grid: GridMap, position: Point, intent: Point) -> Point:
    """Slide along walls: full move, then each axis alone, else stay."""
    for cand in (intent, Point(intent.x, 0.0), Point(0.0, intent.y)):
        if cand.length() <= 1e-12:
            continue
        target = position + cand
        if not grid.in_bounds_point(target):
            continue
        if grid.kind_at(*grid.cell_of(target)) is not CellKind.WALL:
            return target
    return position


def _apply_player_input(state: SimState, inp: PlayerInput) -> list[SoundEvent]:
    cfg = state.config
    player = state.player
    player.stance = inp.stance
    emitted: list[SoundEvent] = []

    intent = inp.move.scaled(cfg[f"player.{inp.stance}_speed"])
    before = player.pose.position
    after = _resolve_move(state.grid, before, intent)
    if after.dist(before) > 1e-9:
        player.pose = Pose(after, bearing(before, after))
        emitted.append(
            SoundEvent(after, cfg[f"player.{inp.stance}_loudness"], state.tick, PLAYER_ID)
        )

    if isinstance(inp.action, ThrowBrick):
        emitted.append(
            SoundEvent(inp.action.target, cfg["player.brick_loudness"], state.tick, PLAYER_ID)
        )
    elif isinstance(inp.action, AttackNpc):
        target = state.agent_by_id(inp.action.target_id)
        if (
            target is not None
            and target.alive
            and player.pose.position.dist(target.pose.position) <= cfg["player.attack_range"]
        ):
            target.alive = False
        emitted.append(
            SoundEvent(player.pose.position, cfg["player.gun_loudness"], state.tick, PLAYER_ID)
        )
    return emitted


def _collect_percepts(state: SimState) -> dict[int, list[Percept]]:
    """Phase 2: sight of the player plus last tick's sounds, per agent."""
    out: dict[int, list[Percept]] = {}
    player_pos = state.player.pose.position
    for agent in state.agents:
        if not agent.alive:
            out[agent.id] = []
            continue
        percepts: list[Percept] = []
        vision = agent.archetype.vision
        if (
            agent.archetype.faction is not Faction.PLAYER_SIDE
            and vision is not None
            and state.player.alive
            and can_see(vision, state.grid, agent.pose, player_pos)
        ):
            percepts.append(Percept(PerceptKind.SIGHT, player_pos, state.tick))
        audible = [ev for ev in state.pending_sounds if ev.source_id != agent.id]
        percepts.extend(
            hear(agent.archetype.hearing, state.grid, agent.pose.position, audible)
        )
        out[agent.id] = percepts
    return out


def step(
    state: SimState,
    inp: PlayerInput,
    select_probe=None,
) -> dict:
    """Advance one tick and return its trace record.

    select_probe, when given, is called once per living agent right before
    its behaviour tick as (tick, agent, valid_skill_specs); replay audits
    use it to re-check priority selection against the recorded skill.
    """
    inp = inp.clamped()
    player_sounds = _apply_player_input(state, inp)

    percepts = _collect_percepts(state)
    state.pending_sounds = []

    grace = state.config.int_("perception.lost_grace")
    for agent in state.agents:
        agent.tick_notes.clear()
        if agent.alive:
            apply_awareness(agent, percepts[agent.id], grace)

    view = TickView(
        grid=state.grid,
        tick=state.tick,
        config=state.config,
        player=PlayerView(state.player.pose, state.player.stance, state.player.alive),
        agents=state.agents,
    )
    actions: dict[int, AgentAction] = {}
    for agent in state.agents:
        if not agent.alive:
            continue
        prepare_posts(agent, view)
        if select_probe is not None:
            valid = [s for s in agent.archetype.skills if s.validity(agent, view)]
            select_probe(state.tick, agent, valid)
        actions[agent.id] = tick_skills(agent, view)

    npc_sounds: list[SoundEvent] = []
    for agent in state.agents:
        action = actions.get(agent.id)
        if action is None:
            continue
        if action.teleport_to is not None:
            agent.pose = Pose(action.teleport_to, agent.pose.heading)
        else:
            moved = _resolve_move(state.grid, agent.pose.position, action.move_intent)
            agent.pose = Pose(moved, agent.pose.heading)
        if action.emit_sound is not None:
            npc_sounds.append(
                SoundEvent(agent.pose.position, action.emit_sound, state.tick, agent.id)
            )
        if action.sound_at is not None:
            where, loudness = action.sound_at
            npc_sounds.append(SoundEvent(where, loudness, state.tick, agent.id))

    emitted = player_sounds + npc_sounds
    state.pending_sounds = emitted

    record = _make_record(state, inp, emitted)
    state.tick += 1
    return record


def _pose_obj(pose: Pose) -> list[float]:
    return [pose.position.x, pose.position.y, pose.heading]


def _make_record(state: SimState, inp: PlayerInput, sounds: list[SoundEvent]) -> dict:
    agents_obj = [
        {
            "id": PLAYER_ID,
            "kind": "player",
            "pose": _pose_obj(state.player.pose),
            "stance": state.player.stance,
            "alive": state.player.alive,
        }
    ]
    for agent in state.agents:
        notes = agent.tick_notes
        agents_obj.append(
            {
                "id": agent.id,
                "kind": agent.kind,
                "pose": _pose_obj(agent.pose),
                "alive": agent.alive,
                "awareness": agent.awareness.phase.value,
                "skill": agent.skill.value if agent.skill else None,
                "stack": [b.value for b in agent.stack.ids()],
                "chosen_post_id": notes.get("chosen_post_id"),
                "follow_candidates": notes.get("follow_candidates"),
                "canvass_unseen": notes.get("canvass_unseen"),
                "post_rays": notes.get("post_rays", 0),
                "teleported": bool(notes.get("teleported", False)),
            }
        )
    draws_total = sum(a.rng.draws for a in state.agents)
    draws_this_tick = draws_total - state.draws_seen
    state.draws_seen = draws_total
    return {
        "tick": state.tick,
        "input": input_to_obj(inp),
        "agents": agents_obj,
        "sounds": [
            {"x": ev.position.x, "y": ev.position.y, "loudness": ev.loudness, "source": ev.source_id}
            for ev in sounds
        ],
        "rng_draws": draws_this_tick,
    }


def record_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def trace_hash(records: list[dict]) -> str:
    digest = hashlib.sha256()
    for record in records:
        digest.update(record_line(record).encode())
        digest.update(b"\n")
    return digest.hexdigest()


def scenario_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def run_headless(
    scenario: Scenario,
    script: list[PlayerInput],
    max_ticks: int,
    seed: int | None = None,
    config_overrides: dict[str, float] | None = None,
    select_probe=None,
) -> list[dict]:
    """Run max_ticks ticks; the script pads with empty inputs when short."""
    if len(script) > max_ticks:
        raise ValueError(f"script has {len(script)} inputs for {max_ticks} ticks")
    state = build_state(scenario, seed=seed, config_overrides=config_overrides)
    records = []
    idle = PlayerInput()
    for t in range(max_ticks):
        inp = script[t] if t < len(script) else idle
        records.append(step(state, inp, select_probe=select_probe))
    return records


def make_header(
    scenario: Scenario,
    seed: int | None = None,
    config_overrides: dict[str, float] | None = None,
) -> dict:
    return {
        "type": "header",
        "scenario": scenario.text,
        "scenario_hash": scenario_hash(scenario.text),
        "seed": scenario.seed if seed is None else seed,
        "config_overrides": dict(config_overrides or {}),
    }


def write_trace(path: str, header: dict, records: list[dict]) -> None:
    with open(path, "w") as fh:
        fh.write(record_line(header) + "\n")
        for record in records:
            fh.write(record_line(record) + "\n")


def read_trace(path: str) -> tuple[dict, list[dict]]:
    with open(path) as fh:
        lines = [line for line in fh.read().splitlines() if line]
    if not lines:
        raise ValueError("empty trace file")
    header = json.loads(lines[0])
    if header.get("type") != "header":
        raise ValueError("trace file missing header line")
    return header, [json.loads(line) for line in lines[1:]]


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    first_divergent_tick: int | None = None
    message: str = "hash match"


def replay_trace(header: dict, records: list[dict]) -> ReplayResult:
    """Re-run the trace's scenario and inputs, compare tick by tick."""
    scenario = load_scenario(header["scenario"])
    overrides = {k: float(v) for k, v in header.get("config_overrides", {}).items()}
    inputs = [input_from_obj(r["input"]) for r in records]
    fresh = run_headless(
        scenario, inputs, len(records), seed=header["seed"], config_overrides=overrides
    )
    for expected, actual in zip(records, fresh):
        if expected != actual:
            tick = actual["tick"]
            return ReplayResult(False, tick, f"divergence at tick {tick}")
    if trace_hash(records) != trace_hash(fresh):
        return ReplayResult(False, None, "hash mismatch")
    return ReplayResult(True)


INFINITE = math.inf


def compute_metrics(records: list[dict]) -> dict:
    """Aggregate per-run metrics from trace records."""
    if not records:
        raise ValueError("empty trace")
    first_detection: dict[int, float] = {}
    skill_ticks: dict[str, int] = {}
    post_rays: list[int] = []
    teleports = 0
    follow_seen = 0
    follow_available = 0
    coverage: dict[int, list[float]] = {}
    canvass_start: dict[int, int] = {}

    for record in records:
        tick = record["tick"]
        rays_this_tick = 0
        for entry in record["agents"]:
            aid = entry["id"]
            if entry["kind"] == "player":
                continue
            if entry["awareness"] != "unaware":
                first_detection.setdefault(aid, tick)
            if entry["skill"]:
                skill_ticks[entry["skill"]] = skill_ticks.get(entry["skill"], 0) + 1
            rays_this_tick += entry["post_rays"]
            if entry["teleported"]:
                teleports += 1
            if entry["follow_candidates"] is not None:
                follow_seen += 1
                if entry["follow_candidates"] > 0:
                    follow_available += 1
            unseen = entry["canvass_unseen"]
            if unseen is None:
                canvass_start.pop(aid, None)
            else:
                start = canvass_start.setdefault(aid, max(unseen, 1))
                coverage.setdefault(aid, []).append(1.0 - unseen / max(start, 1))
        post_rays.append(rays_this_tick)

    npc_ids = sorted(
        e["id"] for e in records[0]["agents"] if e["kind"] != "player"
    )
    return {
        "ticks": len(records),
        "time_to_first_detection": {
            aid: first_detection.get(aid, INFINITE) for aid in npc_ids
        },
        "canvass_coverage": coverage,
        "follow_availability": (follow_available / follow_seen) if follow_seen else None,
        "post_rays_per_tick": post_rays,
        "teleport_count": teleports,
        "skill_occupancy": dict(sorted(skill_ticks.items())),
    }


def metrics_summary(metrics: dict) -> str:
    """Small human-readable digest for CLI output."""
    det = {
        str(k): ("inf" if math.isinf(v) else v)
        for k, v in metrics["time_to_first_detection"].items()
    }
    rays = metrics["post_rays_per_tick"]
    lines = [
        f"ticks: {metrics['ticks']}",
        f"time_to_first_detection: {det}",
        f"post_rays_per_tick: max {max(rays)} min {min(rays)}",
        f"teleport_count: {metrics['teleport_count']}",
        f"follow_availability: {metrics['follow_availability']}",
        f"skill_occupancy: {metrics['skill_occupancy']}",
    ]
    return "\n".join(lines)
