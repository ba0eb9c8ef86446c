"""Scenario document parsing: glyphs, header lines, and line-numbered errors."""

import math

import pytest

from stealthsim.scenario import AgentSpawn, ScenarioError, load_scenario
from stealthsim.world import CellKind, Point

MINIMAL = """\
map:
#####
#P.R#
#####
"""


def test_minimal_document():
    scn = load_scenario(MINIMAL)
    assert scn.seed == 1
    assert scn.tick_rate == 10
    assert scn.player_spawn.position == Point(1.5, 1.5)
    assert len(scn.agents) == 1
    assert scn.agents[0].kind == "runner"
    assert scn.agents[0].pose.position == Point(3.5, 1.5)
    assert scn.text == MINIMAL


def test_spawn_glyphs_become_free_ground():
    scn = load_scenario(MINIMAL)
    assert scn.grid.kind_at(1, 1) is CellKind.FREE
    assert scn.grid.kind_at(3, 1) is CellKind.FREE


def test_all_spawn_glyphs():
    scn = load_scenario(
        "map:\n"
        "##########\n"
        "#P.RSCLHB#\n"
        "##########\n"
    )
    kinds = [a.kind for a in scn.agents]
    assert kinds == ["runner", "stalker", "clicker", "bloater", "hunter", "buddy"]


def test_header_seed_and_tick_rate():
    scn = load_scenario("seed = 0xdeadbeef\ntick_rate = 20\n" + MINIMAL)
    assert scn.seed == 0xDEADBEEF
    assert scn.tick_rate == 20


def test_seed_out_of_range():
    with pytest.raises(ScenarioError, match="line 1.*64 bits"):
        load_scenario(f"seed = {2 ** 64}\n" + MINIMAL)


def test_bad_tick_rate():
    with pytest.raises(ScenarioError, match="line 1.*tick_rate"):
        load_scenario("tick_rate = 0\n" + MINIMAL)


def test_config_entry_recognised():
    scn = load_scenario("canvass.radius = 3\n" + MINIMAL)
    assert scn.config["canvass.radius"] == 3.0
    assert ("canvass.radius", 3.0) in scn.config_entries


def test_unknown_config_key_is_line_error():
    with pytest.raises(ScenarioError, match="line 2: unknown config key"):
        load_scenario("seed = 7\ncanvas.radius = 3\n" + MINIMAL)


def test_header_agent_with_overrides():
    scn = load_scenario(
        "agent = hunter 2.5 1.5 heading=1.5 armed=0 script=3.5,1.5;2.5,1.5\n"
        "map:\n"
        "#####\n"
        "#P..#\n"
        "#####\n"
    )
    (spawn,) = scn.agents
    assert spawn.kind == "hunter"
    assert spawn.pose.heading == pytest.approx(1.5)
    assert spawn.override("armed") == 0.0
    assert spawn.override("script") == (Point(3.5, 1.5), Point(2.5, 1.5))
    assert spawn.override("missing", "fallback") == "fallback"


def test_map_agents_precede_header_agents():
    scn = load_scenario(
        "agent = hunter 2.5 1.5\n"
        "map:\n"
        "#####\n"
        "#P.B#\n"
        "#####\n"
    )
    assert [a.kind for a in scn.agents] == ["buddy", "hunter"]


def test_unknown_archetype():
    with pytest.raises(ScenarioError, match="line 1: unknown archetype 'zombie'"):
        load_scenario("agent = zombie 2.5 1.5\n" + MINIMAL)


def test_unknown_agent_override():
    with pytest.raises(ScenarioError, match="unknown agent override 'speed'"):
        load_scenario("agent = runner 2.5 1.5 speed=9\n" + MINIMAL)


def test_spawn_on_wall_is_an_error():
    with pytest.raises(ScenarioError, match=r"line 1: spawn on blocked cell \(0, 0\)"):
        load_scenario("agent = runner 0.5 0.5\n" + MINIMAL)


def test_spawn_on_low_cover_is_an_error():
    doc = (
        "agent = runner 2.5 1.5\n"
        "map:\n"
        "#####\n"
        "#P~.#\n"
        "#####\n"
    )
    with pytest.raises(ScenarioError, match="spawn on blocked cell"):
        load_scenario(doc)


def test_unequal_rows():
    doc = "map:\n#####\n#P.#\n#####\n"
    with pytest.raises(ScenarioError, match="line 3: rows must be equal length"):
        load_scenario(doc)


def test_unknown_map_character():
    doc = "map:\n#####\n#P!.#\n#####\n"
    with pytest.raises(ScenarioError, match="line 3: unknown map character '!' at column 3"):
        load_scenario(doc)


def test_player_required_exactly_once():
    with pytest.raises(ScenarioError, match="exactly one player spawn required, found 0"):
        load_scenario("map:\n###\n#.#\n###\n")
    with pytest.raises(ScenarioError, match="found 2"):
        load_scenario("map:\n####\n#PP#\n####\n")


def test_missing_map_block():
    with pytest.raises(ScenarioError, match="missing map block"):
        load_scenario("seed = 3\n")


def test_header_junk_line():
    with pytest.raises(ScenarioError, match="line 1: expected"):
        load_scenario("just some words\n" + MINIMAL)


def test_scenario_error_is_value_error():
    assert issubclass(ScenarioError, ValueError)


def test_agent_heading_defaults_to_east():
    scn = load_scenario(MINIMAL)
    assert scn.agents[0].pose.heading == 0.0
    assert scn.player_spawn.heading == 0.0


def test_heading_folds_into_pose_not_overrides():
    scn = load_scenario("agent = runner 2.5 1.5 heading=3.14\n" + MINIMAL)
    header_spawn = scn.agents[1]
    assert header_spawn.pose.heading == pytest.approx(3.14)
    assert header_spawn.override("heading") is None


def test_blank_lines_and_indentation_tolerated():
    scn = load_scenario("\nseed = 5\n\n" + MINIMAL)
    assert scn.seed == 5
