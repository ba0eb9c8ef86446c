"""Flat numeric tunables with a closed key registry.

Every gameplay constant that scenarios may override lives here as a dotted
key with its shipped default.  Scenario files and the CLI reject unknown
keys outright, so a typo never silently falls back to a default.  Values
are plain numbers; semantics (units, ticks) are noted per key.
"""

from __future__ import annotations

# Keyed defaults. Distances are in cells, times in ticks (10 ticks/second),
# loudness values are open-field audible radii in cells.
DEFAULTS: dict[str, float] = {
    "sim.tick_rate": 10.0,
    # Perception.
    "perception.lost_grace": 30.0,
    "perception.occlusion_factor": 0.5,
    # Infected vision (inverse-distance cone). r_max 0 means blind.
    "runner.vision_r_max": 12.0,
    "stalker.vision_r_max": 10.0,
    "clicker.vision_r_max": 0.0,
    "bloater.vision_r_max": 8.0,
    # Hearing thresholds (minimum received loudness).
    "runner.hear_threshold": 1.0,
    "stalker.hear_threshold": 1.0,
    "clicker.hear_threshold": 0.5,
    "bloater.hear_threshold": 1.2,
    "hunter.hear_threshold": 1.5,
    "buddy.hear_threshold": 1.5,
    # Movement, cells per tick.
    "runner.move_speed": 0.5,
    "stalker.move_speed": 0.35,
    "clicker.move_speed": 0.3,
    "bloater.move_speed": 0.2,
    "hunter.move_speed": 0.35,
    "buddy.move_speed": 0.4,
    # Footstep loudness while moving.
    "runner.footstep_loudness": 6.0,
    "stalker.footstep_loudness": 2.0,
    "clicker.footstep_loudness": 4.0,
    "bloater.footstep_loudness": 8.0,
    "hunter.footstep_loudness": 4.0,
    "buddy.footstep_loudness": 3.0,
    # Player locomotion and noise by stance.
    "player.walk_speed": 0.3,
    "player.sneak_speed": 0.15,
    "player.sprint_speed": 0.5,
    "player.walk_loudness": 4.0,
    "player.sneak_loudness": 0.8,
    "player.sprint_loudness": 8.0,
    "player.brick_loudness": 25.0,
    "player.gun_loudness": 30.0,
    "player.attack_range": 1.5,
    # Canvass search.
    "canvass.radius": 6.0,
    "canvass.recency": 3.0,
    # Buddy follow positions.
    "follow.r_min": 1.5,
    "follow.r_max": 3.5,
    "follow.n_rays": 16.0,
    "follow.forward_len": 2.0,
    "follow.anchor_break": 1.0,
    "follow.teleport_patience": 90.0,
    "follow.teleport_min_path": 12.0,
    # Tactical posts.
    "posts.max_cover": 20.0,
    "posts.max_open": 20.0,
    "posts.ring_min": 2.0,
    "posts.ring_max": 5.0,
    "posts.exclusion_radius": 2.0,
    "posts.recent": 4.0,
    # Squad-wide agent toggles (0 or 1).
    "hunter.armed": 1.0,
    "infected.sleeping": 0.0,
    # Combat stimuli.
    "combat.melee_range": 1.2,
    "combat.melee_enter": 2.5,
    "combat.melee_loudness": 5.0,
    "combat.gun_cooldown": 8.0,
    "combat.gun_range": 14.0,
    "combat.gun_loudness": 30.0,
    "combat.throw_cooldown": 30.0,
    "combat.throw_range": 10.0,
    "combat.throw_loudness": 12.0,
}


class UnknownConfigKey(KeyError):
    def __init__(self, key: str) -> None:
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"unknown config key: {self.key}"


class Config:
    """Immutable view over DEFAULTS plus validated overrides."""

    def __init__(self, overrides: dict[str, float] | None = None) -> None:
        merged = dict(DEFAULTS)
        for key, value in (overrides or {}).items():
            if key not in DEFAULTS:
                raise UnknownConfigKey(key)
            merged[key] = float(value)
        self._values = merged

    def __getitem__(self, key: str) -> float:
        try:
            return self._values[key]
        except KeyError:
            raise UnknownConfigKey(key) from None

    def int_(self, key: str) -> int:
        return int(round(self[key]))

    def as_dict(self) -> dict[str, float]:
        return dict(self._values)
