"""The archetype table: who has which skills, senses, and reflexes.

Everything tunable about agent kinds is declared here as data so balance
work never touches the engine.  Six kinds ship: four infected (Runner,
Stalker, Clicker, Bloater) sharing one skill set apart from the Stalker's
Ambush and the Bloater's Throw, the Hunter with the eight human skills,
and the Buddy who shadows the player.

Infected see poorly but hear keenly; the table is arranged so that every
infected sight range stays below the Hunter's and every infected hearing
threshold stays below (more sensitive than) the Hunter's.
"""

from __future__ import annotations

import math

from .agents import (
    Agent,
    Archetype,
    BehaviourId,
    Faction,
    SkillId,
    SkillSpec,
    TickView,
)
from .config import Config
from .perception import (
    AwarenessPhase,
    HearingModel,
    InverseDistanceCone,
    MultiCone,
    VisionModel,
)
from .world import RayHeight, raycast

INFECTED_KINDS = ("runner", "stalker", "clicker", "bloater")
ALL_KINDS = INFECTED_KINDS + ("hunter", "buddy")


def _always(agent: Agent, view: TickView) -> bool:
    return True


def _is_alert(agent: Agent, view: TickView) -> bool:
    return agent.phase is AwarenessPhase.ALERT


def _is_searching(agent: Agent, view: TickView) -> bool:
    return agent.phase is AwarenessPhase.SEARCHING


def _heard_something(agent: Agent, view: TickView) -> bool:
    return agent.phase in (AwarenessPhase.SUSPICIOUS, AwarenessPhase.SEARCHING)


def _sleep_valid(agent: Agent, view: TickView) -> bool:
    return (
        agent.sleeping
        and agent.phase is AwarenessPhase.UNAWARE
        and agent.stimulus_count == 0
    )


def _follow_commotion_valid(agent: Agent, view: TickView) -> bool:
    return (
        agent.phase is AwarenessPhase.UNAWARE
        and bool(view.alert_infected_allies(agent))
    )


def _throw_valid(agent: Agent, view: TickView) -> bool:
    if agent.phase is not AwarenessPhase.ALERT:
        return False
    if view.tick - agent.last_throw_tick < view.config.int_("combat.throw_cooldown"):
        return False
    player = view.player.pose.position
    if view.player_distance(agent) > view.cfg("combat.throw_range"):
        return False
    return raycast(view.grid, agent.pose.position, player, RayHeight.STAND).clear


def _scripted_valid(agent: Agent, view: TickView) -> bool:
    return agent.script_index < len(agent.script)


def _panic_valid(agent: Agent, view: TickView) -> bool:
    return not agent.armed and agent.phase is AwarenessPhase.ALERT


def _melee_valid(agent: Agent, view: TickView) -> bool:
    return (
        agent.phase is AwarenessPhase.ALERT
        and view.player_distance(agent) <= view.cfg("combat.melee_enter")
    )


def _gun_combat_valid(agent: Agent, view: TickView) -> bool:
    if not agent.armed or agent.phase is not AwarenessPhase.ALERT:
        return False
    table = agent.post_table
    return table is not None and table.best_rating("take-cover") > 0.0


def _flank_valid(agent: Agent, view: TickView) -> bool:
    if not agent.armed or agent.phase is not AwarenessPhase.ALERT:
        return False
    table = agent.post_table
    if table is None:
        return False
    return table.best_rating("flank") > table.best_rating("take-cover")


def _advance_valid(agent: Agent, view: TickView) -> bool:
    return agent.armed and agent.phase is AwarenessPhase.ALERT


def _hunter_hide_valid(agent: Agent, view: TickView) -> bool:
    return not agent.armed and agent.phase is not AwarenessPhase.UNAWARE


def _buddy_hide_valid(agent: Agent, view: TickView) -> bool:
    return any(
        a.phase is AwarenessPhase.ALERT for a in view.threats_to_player_side()
    )


def _canvass_params(agent: Agent, view: TickView) -> dict:
    return {"focus": agent.awareness.focus}


def _chase_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "focus", "attack_melee": True}


def _advance_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "player", "attack_melee": True, "arrive": 1.0, "hold": True}


def _investigate_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "focus_or_guard", "hold": True}


def _script_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "script"}


def _follow_ally_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "alert_ally", "arrive": 2.0, "hold": True}


def _flee_params(agent: Agent, view: TickView) -> dict:
    return {"mode": "flee", "hold": True}


def _take_cover_shoot_params(agent: Agent, view: TickView) -> dict:
    return {"selector": "take-cover", "hold": "shoot"}


def _flank_params(agent: Agent, view: TickView) -> dict:
    return {"selector": "flank", "hold": "shoot"}


def _hide_params(agent: Agent, view: TickView) -> dict:
    return {"selector": "hide", "hold": "crouch"}


def _infected_posts_active(agent: Agent, view: TickView) -> bool:
    return False


def _hunter_posts_active(agent: Agent, view: TickView) -> bool:
    return agent.phase is not AwarenessPhase.UNAWARE


def _buddy_posts_active(agent: Agent, view: TickView) -> bool:
    return _buddy_hide_valid(agent, view)


def _infected_skills(kind: str) -> tuple[SkillSpec, ...]:
    skills = [
        SkillSpec(SkillId.CHASE, 90, _is_alert, BehaviourId.MOVE_TO_LOCATION, _chase_params),
        SkillSpec(SkillId.SEARCH, 70, _is_searching, BehaviourId.CANVASS, _canvass_params),
        SkillSpec(SkillId.SLEEP, 40, _sleep_valid, BehaviourId.IDLE),
        SkillSpec(
            SkillId.FOLLOW,
            30,
            _follow_commotion_valid,
            BehaviourId.MOVE_TO_LOCATION,
            _follow_ally_params,
        ),
        SkillSpec(SkillId.WANDER, 10, _always, BehaviourId.WANDER_STEP),
    ]
    if kind == "stalker":
        skills.append(
            SkillSpec(SkillId.AMBUSH, 85, _heard_something, BehaviourId.AMBUSH_WAIT)
        )
    if kind == "bloater":
        skills.append(
            SkillSpec(SkillId.THROW, 95, _throw_valid, BehaviourId.THROW_PROJECTILE)
        )
    return tuple(skills)


_HUNTER_SKILLS = (
    SkillSpec(SkillId.SCRIPTED, 100, _scripted_valid, BehaviourId.MOVE_TO_LOCATION, _script_params),
    SkillSpec(SkillId.PANIC, 95, _panic_valid, BehaviourId.MOVE_TO_LOCATION, _flee_params),
    SkillSpec(SkillId.MELEE, 90, _melee_valid, BehaviourId.MOVE_TO_LOCATION, _chase_params),
    SkillSpec(SkillId.GUN_COMBAT, 80, _gun_combat_valid, BehaviourId.TAKE_COVER, _take_cover_shoot_params),
    SkillSpec(SkillId.FLANK, 70, _flank_valid, BehaviourId.TAKE_COVER, _flank_params),
    SkillSpec(SkillId.ADVANCE, 60, _advance_valid, BehaviourId.MOVE_TO_LOCATION, _advance_params),
    SkillSpec(SkillId.HIDE, 50, _hunter_hide_valid, BehaviourId.TAKE_COVER, _hide_params),
    SkillSpec(SkillId.INVESTIGATE, 10, _always, BehaviourId.MOVE_TO_LOCATION, _investigate_params),
)

_BUDDY_SKILLS = (
    SkillSpec(SkillId.SCRIPTED, 100, _scripted_valid, BehaviourId.MOVE_TO_LOCATION, _script_params),
    SkillSpec(SkillId.HIDE, 50, _buddy_hide_valid, BehaviourId.TAKE_COVER, _hide_params),
    SkillSpec(SkillId.FOLLOW, 10, _always, BehaviourId.FOLLOW_PLAYER),
)


def _infected_vision(r_max: float) -> VisionModel | None:
    """Inverse-distance cone, or no sight at all when the range is zero."""
    if r_max <= 0.0:
        return None
    return InverseDistanceCone(
        theta_max=math.pi / 2, k=math.pi / 2, d_close=1.0, r_max=r_max
    )


def archetype_defaults(kind: str, config: Config | None = None) -> Archetype:
    """The shipped archetype for one kind, with config overrides applied."""
    cfg = config or Config()
    if kind not in ALL_KINDS:
        raise ValueError(f"unknown archetype kind: {kind}")
    hearing = HearingModel(
        threshold=cfg[f"{kind}.hear_threshold"],
        occlusion_factor=cfg["perception.occlusion_factor"],
    )
    common = dict(
        kind=kind,
        hearing=hearing,
        move_speed=cfg[f"{kind}.move_speed"],
        footstep_loudness=cfg[f"{kind}.footstep_loudness"],
    )
    if kind in INFECTED_KINDS:
        return Archetype(
            faction=Faction.INFECTED,
            skills=_infected_skills(kind),
            vision=_infected_vision(cfg[f"{kind}.vision_r_max"]),
            posts_active=_infected_posts_active,
            sleeping=cfg["infected.sleeping"] != 0.0,
            **common,
        )
    if kind == "hunter":
        return Archetype(
            faction=Faction.HUMAN_ENEMY,
            skills=_HUNTER_SKILLS,
            vision=MultiCone.default(),
            posts_active=_hunter_posts_active,
            armed=cfg["hunter.armed"] != 0.0,
            **common,
        )
    return Archetype(
        faction=Faction.PLAYER_SIDE,
        skills=_BUDDY_SKILLS,
        vision=MultiCone.default(),
        posts_active=_buddy_posts_active,
        **common,
    )
