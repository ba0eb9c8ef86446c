"""Scenario documents: a `key = value` header followed by an ASCII map.

Header keys are `seed`, `tick_rate`, repeatable `agent` lines, and any
registered config key.  The map block starts at a line reading `map:` and
runs to the end of the document; rows must be equal length.  Map glyphs:
`#` wall, `~` low cover, `.` free, `P` player spawn, `R` runner, `S`
stalker, `C` clicker, `L` bloater, `H` hunter, `B` buddy.  Spawn glyphs sit
on free ground.  Extra agents (with overrides like heading, armed, or a
patrol script) come from header lines:

    agent = hunter 3.5 4.5 armed=0 script=6.5,4.5;9.5,2.5

Every parse error carries the 1-based line number it was found on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .archetypes import ALL_KINDS
from .config import Config, DEFAULTS, UnknownConfigKey
from .world import CellKind, GridMap, Point, Pose

SPAWN_GLYPHS = {
    "R": "runner",
    "S": "stalker",
    "C": "clicker",
    "L": "bloater",
    "H": "hunter",
    "B": "buddy",
}
MAP_GLYPHS = set("#~.P") | set(SPAWN_GLYPHS)

_OVERRIDE_KEYS = ("heading", "armed", "sleeping", "script")


class ScenarioError(ValueError):
    """Parse or validation failure, message prefixed with `line N:`."""


def _err(line_no: int, message: str) -> ScenarioError:
    return ScenarioError(f"line {line_no}: {message}")


@dataclass(frozen=True)
class AgentSpawn:
    kind: str
    pose: Pose
    overrides: tuple[tuple[str, object], ...] = ()

    def override(self, key: str, default=None):
        for k, v in self.overrides:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class Scenario:
    text: str
    grid: GridMap
    player_spawn: Pose
    agents: tuple[AgentSpawn, ...]
    seed: int
    tick_rate: int
    config: Config
    config_entries: tuple[tuple[str, float], ...] = field(default=())


def _parse_agent_line(line_no: int, value: str) -> AgentSpawn:
    parts = value.split()
    if len(parts) < 3:
        raise _err(line_no, "agent needs: kind x y [key=value ...]")
    kind = parts[0]
    if kind not in ALL_KINDS:
        raise _err(line_no, f"unknown archetype {kind!r}")
    try:
        x, y = float(parts[1]), float(parts[2])
    except ValueError:
        raise _err(line_no, f"bad agent coordinates {parts[1]!r} {parts[2]!r}") from None
    heading = 0.0
    overrides: list[tuple[str, object]] = []
    for token in parts[3:]:
        if "=" not in token:
            raise _err(line_no, f"bad agent override {token!r} (want key=value)")
        key, _, raw = token.partition("=")
        if key not in _OVERRIDE_KEYS:
            raise _err(line_no, f"unknown agent override {key!r}")
        if key == "script":
            try:
                points = tuple(
                    Point(*(float(c) for c in pair.split(",")))
                    for pair in raw.split(";")
                    if pair
                )
            except (ValueError, TypeError):
                raise _err(line_no, f"bad script {raw!r} (want x,y;x,y)") from None
            overrides.append(("script", points))
            continue
        try:
            num = float(raw)
        except ValueError:
            raise _err(line_no, f"bad numeric override {token!r}") from None
        if key == "heading":
            heading = num
        else:
            overrides.append((key, num))
    return AgentSpawn(kind, Pose(Point(x, y), heading), tuple(overrides))


def load_scenario(text: str) -> Scenario:
    """Parse and fully validate one scenario document."""
    seed = 1
    tick_rate = int(DEFAULTS["sim.tick_rate"])
    config_entries: list[tuple[str, float]] = []
    header_agents: list[tuple[int, AgentSpawn]] = []
    map_rows: list[tuple[int, str]] = []
    in_map = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if in_map:
            if line:
                map_rows.append((line_no, line))
            continue
        if not line.strip():
            continue
        if line.strip() == "map:":
            in_map = True
            continue
        if "=" not in line:
            raise _err(line_no, f"expected `key = value` or `map:`, got {line.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "seed":
            try:
                seed = int(value, 0)
            except ValueError:
                raise _err(line_no, f"bad seed {value!r}") from None
            if not 0 <= seed < 2**64:
                raise _err(line_no, "seed must fit in 64 bits")
        elif key == "tick_rate":
            try:
                tick_rate = int(value)
            except ValueError:
                raise _err(line_no, f"bad tick_rate {value!r}") from None
            if tick_rate <= 0:
                raise _err(line_no, "tick_rate must be positive")
        elif key == "agent":
            header_agents.append((line_no, _parse_agent_line(line_no, value)))
        else:
            if key not in DEFAULTS:
                raise _err(line_no, f"unknown config key {key!r}")
            try:
                config_entries.append((key, float(value)))
            except ValueError:
                raise _err(line_no, f"bad numeric value {value!r} for {key!r}") from None

    if not map_rows:
        raise ScenarioError("missing map block (`map:` line followed by rows)")

    width = len(map_rows[0][1])
    rows: list[str] = []
    player_cells: list[tuple[int, int, int]] = []
    map_agents: list[tuple[int, AgentSpawn]] = []
    for iy, (line_no, row) in enumerate(map_rows):
        if len(row) != width:
            raise _err(line_no, f"rows must be equal length (expected {width}, got {len(row)})")
        for ix, ch in enumerate(row):
            if ch not in MAP_GLYPHS:
                raise _err(line_no, f"unknown map character {ch!r} at column {ix + 1}")
            if ch == "P":
                player_cells.append((line_no, ix, iy))
            elif ch in SPAWN_GLYPHS:
                pose = Pose(Point(ix + 0.5, iy + 0.5), 0.0)
                map_agents.append((line_no, AgentSpawn(SPAWN_GLYPHS[ch], pose)))
        rows.append("".join("." if ch in SPAWN_GLYPHS or ch == "P" else ch for ch in row))

    grid = GridMap.from_rows(rows)
    if len(player_cells) != 1:
        raise ScenarioError(
            f"exactly one player spawn required, found {len(player_cells)}"
        )
    _, px, py = player_cells[0]
    player_spawn = Pose(grid.cell_center((px, py)), 0.0)

    agents: list[AgentSpawn] = []
    for line_no, spawn in map_agents + header_agents:
        cell = grid.cell_of(spawn.pose.position)
        if grid.kind_at(*cell) is not CellKind.FREE:
            raise _err(line_no, f"spawn on blocked cell {cell}")
        agents.append(spawn)

    try:
        config = Config(dict(config_entries))
    except UnknownConfigKey as exc:  # closed registry re-check
        raise ScenarioError(str(exc)) from exc

    return Scenario(
        text=text,
        grid=grid,
        player_spawn=player_spawn,
        agents=tuple(agents),
        seed=seed,
        tick_rate=tick_rate,
        config=config,
        config_entries=tuple(config_entries),
    )
