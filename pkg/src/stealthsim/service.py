"""Live session service: one simulation per websocket connection.

The browser client connects to /ws, says hello, and from then on the
server advances the sim at the scenario tick rate, sampling the latest
received input each tick (move and stance persist until replaced; an
action fires exactly once).  Snapshots go out after every tick through a
latest-wins box, so a slow reader drops frames instead of stalling the
loop.  Overlay blocks are computed on demand and attached only while the
client has them toggled on.

Control commands: pause, resume, reset (optional new seed), and step,
which advances exactly one tick while paused so a scripted client can
drive the sim in lockstep and compare against a headless run.
"""

from __future__ import annotations

import asyncio
import json
from contextlib import suppress

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .agents import Agent, BehaviourId
from .follow import FollowRegion, generate_follow_positions
from .perception import InverseDistanceCone, MultiCone
from .posts import SELECTORS, rate_posts
from .scenario import Scenario
from .sim import PLAYER_ID, PlayerInput, build_state, input_from_obj, step
from .world import CellKind, Point

OVERLAY_KEYS = ("cones", "posts", "canvass", "follow")
_GLYPHS = {CellKind.WALL: "#", CellKind.LOW_COVER: "~", CellKind.FREE: "."}


def _map_rows(grid) -> list[str]:
    return [
        "".join(_GLYPHS[grid.kind_at(ix, iy)] for ix in range(grid.width))
        for iy in range(grid.height)
    ]


def _vision_obj(model) -> dict | None:
    match model:
        case None:
            return None
        case InverseDistanceCone():
            return {
                "kind": "inverse",
                "theta_max": model.theta_max,
                "k": model.k,
                "d_close": model.d_close,
                "r_max": model.r_max,
            }
        case MultiCone():
            return {
                "kind": "multi",
                "cones": [
                    {"half_angle": c.half_angle, "range": c.range} for c in model.cones
                ],
            }
    return None


def _frame_on_stack(agent: Agent, behaviour: BehaviourId) -> dict | None:
    for frame in agent.stack.frames():
        if frame.id is behaviour:
            return frame.params
    return None


class Session:
    """Sim plus per-connection client state (input, toggles, pause)."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        config_overrides: dict[str, float] | None = None,
    ):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.overrides = dict(config_overrides or {})
        self.state = build_state(scenario, seed=self.seed, config_overrides=self.overrides)
        self.move = [0.0, 0.0]
        self.stance = "walk"
        self.pending_action = None
        self.paused = False
        self.step_requests = 0
        self.overlays = dict.fromkeys(OVERLAY_KEYS, False)

    # -- messages ------------------------------------------------------

    def handle(self, obj: dict) -> dict | None:
        """Apply one client message; returns a direct reply or None."""
        kind = obj.get("type")
        if kind == "hello":
            return self.meta()
        if kind == "input":
            inp = input_from_obj(obj)
            self.move = [inp.move.x, inp.move.y]
            self.stance = inp.stance
            if inp.action is not None:
                self.pending_action = inp.action
            return None
        if kind == "control":
            return self._control(obj)
        if kind == "set_overlay":
            for key in OVERLAY_KEYS:
                if key in obj:
                    self.overlays[key] = bool(obj[key])
            return None
        return self.error(f"unknown message type {kind!r}")

    def _control(self, obj: dict) -> dict | None:
        cmd = obj.get("cmd")
        if cmd == "pause":
            self.paused = True
        elif cmd == "resume":
            self.paused = False
        elif cmd == "step":
            self.step_requests += 1
        elif cmd == "reset":
            if obj.get("seed") is not None:
                self.seed = int(obj["seed"])
            self.state = build_state(
                self.scenario, seed=self.seed, config_overrides=self.overrides
            )
            self.move = [0.0, 0.0]
            self.stance = "walk"
            self.pending_action = None
            return self.meta()
        else:
            return self.error(f"unknown control command {cmd!r}")
        return None

    def error(self, message: str) -> dict:
        return {"type": "error", "tick": self.state.tick, "message": message}

    def meta(self) -> dict:
        grid = self.state.grid
        roster = [{"id": PLAYER_ID, "kind": "player"}]
        roster += [{"id": a.id, "kind": a.kind} for a in self.state.agents]
        return {
            "type": "meta",
            "tick": self.state.tick,
            "map": {"width": grid.width, "height": grid.height, "rows": _map_rows(grid)},
            "legend": {"#": "wall", "~": "low_cover", ".": "free"},
            "agents": roster,
            "seed": self.seed,
            "tick_rate": self.scenario.tick_rate,
        }

    # -- ticking -------------------------------------------------------

    def advance(self) -> dict:
        inp = PlayerInput(
            move=Point(self.move[0], self.move[1]),
            stance=self.stance,
            action=self.pending_action,
        )
        self.pending_action = None
        record = step(self.state, inp)
        return self.snapshot(record)

    def snapshot(self, record: dict) -> dict:
        agents = []
        for entry in record["agents"]:
            out = {
                "id": entry["id"],
                "kind": entry["kind"],
                "pose": entry["pose"],
                "awareness": entry.get("awareness"),
                "skill": entry.get("skill"),
                "alive": entry["alive"],
            }
            if entry["id"] == PLAYER_ID:
                out["stance"] = entry["stance"]
            agents.append(out)
        return {
            "type": "snapshot",
            "tick": record["tick"],
            "agents": agents,
            "overlays": self._overlays(),
        }

    def _overlays(self) -> dict:
        out: dict = {}
        if self.overlays["cones"]:
            out["cones"] = [
                {
                    "agent": a.id,
                    "pose": [a.pose.position.x, a.pose.position.y, a.pose.heading],
                    "model": _vision_obj(a.archetype.vision),
                }
                for a in self.state.agents
                if a.alive and a.archetype.vision is not None
            ]
        if self.overlays["posts"]:
            out["posts"] = [b for b in map(self._posts_block, self.state.agents) if b]
        if self.overlays["canvass"]:
            out["canvass"] = [b for b in map(self._canvass_block, self.state.agents) if b]
        if self.overlays["follow"]:
            out["follow"] = [b for b in map(self._follow_block, self.state.agents) if b]
        return out

    def _posts_block(self, agent: Agent) -> dict | None:
        table = agent.post_table
        if not agent.alive or table is None or not table.posts:
            return None
        params = _frame_on_stack(agent, BehaviourId.TAKE_COVER)
        selector = SELECTORS[(params or {}).get("selector", "take-cover")]
        by_id = {p.id: p for p in table.posts}
        ratings = rate_posts(selector, table.valid_posts(), table.ctx)[:5]
        threat = table.ctx.threat
        return {
            "agent": agent.id,
            "selector": selector.name,
            "threat": [threat.x, threat.y] if threat else None,
            "entries": [
                {
                    "id": r.post_id,
                    "x": by_id[r.post_id].position.x,
                    "y": by_id[r.post_id].position.y,
                    "kind": by_id[r.post_id].kind.value,
                    "rating": r.rating,
                }
                for r in ratings
            ],
        }

    def _canvass_block(self, agent: Agent) -> dict | None:
        params = agent.alive and _frame_on_stack(agent, BehaviourId.CANVASS)
        if not params or "canvass" not in params:
            return None
        canvass = params["canvass"]
        pending = params.get("pending")
        return {
            "agent": agent.id,
            "cells": [
                [cell[0], cell[1], state.value]
                for cell, state in sorted(canvass.states.items())
            ],
            "pending": [pending.position.x, pending.position.y] if pending else None,
        }

    def _follow_block(self, agent: Agent) -> dict | None:
        if not agent.alive or _frame_on_stack(agent, BehaviourId.FOLLOW_PLAYER) is None:
            return None
        cfg = self.state.config
        candidates = generate_follow_positions(
            self.state.grid,
            self.state.player.pose,
            FollowRegion(r_min=cfg["follow.r_min"], r_max=cfg["follow.r_max"]),
            n_rays=cfg.int_("follow.n_rays"),
            forward_len=cfg["follow.forward_len"],
            buddy=agent.pose.position,
        )
        return {
            "agent": agent.id,
            "candidates": [
                {
                    "x": c.position.x,
                    "y": c.position.y,
                    "fx": c.forward_point.x,
                    "fy": c.forward_point.y,
                    "stage": c.stage_reached.value,
                    "score": c.score,
                }
                for c in candidates
            ],
        }


def create_app(
    scenario: Scenario,
    seed: int | None = None,
    config_overrides: dict[str, float] | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """App with the /ws session endpoint and optional static UI assets."""
    app = FastAPI()

    @app.websocket("/ws")
    async def ws_session(ws: WebSocket) -> None:
        await ws.accept()
        session = Session(scenario, seed=seed, config_overrides=config_overrides)
        box: list[dict] = []
        fresh = asyncio.Event()

        async def sender() -> None:
            while True:
                await fresh.wait()
                fresh.clear()
                while box:
                    snap = box[-1]
                    box.clear()
                    await ws.send_text(json.dumps(snap))

        def publish(snap: dict) -> None:
            box[:] = [snap]
            fresh.set()

        send_task = asyncio.create_task(sender())
        period = 1.0 / session.scenario.tick_rate
        loop = asyncio.get_running_loop()
        deadline = loop.time() + period
        started = False
        try:
            while True:
                while session.paused and session.step_requests > 0:
                    session.step_requests -= 1
                    publish(session.advance())
                timeout = max(0.0, deadline - loop.time()) if started else None
                try:
                    raw = await asyncio.wait_for(ws.receive_text(), timeout=timeout)
                except asyncio.TimeoutError:
                    if not session.paused:
                        publish(session.advance())
                    deadline += period
                    if deadline < loop.time():
                        deadline = loop.time() + period
                    continue
                try:
                    obj = json.loads(raw)
                    if not isinstance(obj, dict):
                        raise ValueError("message must be an object")
                    reply = session.handle(obj)
                except (ValueError, KeyError, TypeError) as exc:
                    reply = session.error(f"malformed message: {exc}")
                if reply is not None:
                    await ws.send_text(json.dumps(reply))
                    if reply["type"] == "meta" and not started:
                        started = True
                        deadline = loop.time() + period
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            with suppress(asyncio.CancelledError):
                await send_task

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
