"""Command line front door: headless runs, replay audits, live serving.

Subcommands:

  run       execute a scenario headlessly against an input script and
            write the trace; prints a metrics digest
  replay    re-run a trace file's scenario and inputs and verify the
            result hash; reports the first divergent tick on mismatch
  serve     host the websocket session service (and the browser UI when
            a static directory is supplied)
  validate  parse a scenario file and report the first error

Global flags `--seed` and `--config key=value` override the scenario
header; they sit before the subcommand.  Input scripts are JSON lines,
one object per tick in wire-input shape, e.g.
`{"move": [1, 0], "stance": "sprint"}`; blank lines and `#` comments are
skipped, and a short script pads out with idle input.  All failures exit
nonzero with a single `error: ...` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .config import DEFAULTS
from .scenario import Scenario, ScenarioError, load_scenario
from .sim import (
    PlayerInput,
    compute_metrics,
    input_from_obj,
    make_header,
    metrics_summary,
    read_trace,
    replay_trace,
    run_headless,
    write_trace,
)


class HarnessError(Exception):
    """Fatal CLI failure with a one-line message."""


def _scenario_text(path: str) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text()
    shipped = resources.files(__package__) / "scenarios" / path
    if shipped.is_file():
        return shipped.read_text()
    raise HarnessError(f"scenario not found: {path}")


def load_scenario_file(path: str) -> Scenario:
    try:
        return load_scenario(_scenario_text(path))
    except ScenarioError as exc:
        raise HarnessError(f"{path}: {exc}") from exc


def read_script(path: str) -> list[PlayerInput]:
    p = Path(path)
    if not p.is_file():
        shipped = resources.files(__package__) / "scenarios" / path
        if shipped.is_file():
            p = shipped
        else:
            raise HarnessError(f"script not found: {path}")
    inputs: list[PlayerInput] = []
    for line_no, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            inputs.append(input_from_obj(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise HarnessError(f"{path}: line {line_no}: {exc}") from exc
    return inputs


def parse_config_flags(pairs: list[str]) -> dict[str, float]:
    overrides: dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise HarnessError(f"--config wants key=value, got {pair!r}")
        key = key.strip()
        if key not in DEFAULTS:
            raise HarnessError(f"unknown config key {key!r}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise HarnessError(f"bad numeric value {value!r} for {key!r}") from None
    return overrides


def _cmd_run(args, seed: int | None, overrides: dict[str, float]) -> int:
    scenario = load_scenario_file(args.scenario)
    script = read_script(args.script) if args.script else []
    ticks = args.ticks if args.ticks is not None else len(script)
    if ticks <= 0:
        raise HarnessError("--ticks required when no script is given")
    records = run_headless(
        scenario, script, ticks, seed=seed, config_overrides=overrides
    )
    if args.trace:
        write_trace(args.trace, make_header(scenario, seed, overrides), records)
    print(metrics_summary(compute_metrics(records)))
    return 0


def _cmd_replay(args, seed: int | None, overrides: dict[str, float]) -> int:
    try:
        header, records = read_trace(args.trace)
    except (OSError, ValueError) as exc:
        raise HarnessError(f"{args.trace}: {exc}") from exc
    if not records:
        raise HarnessError(f"{args.trace}: trace has no tick records")
    result = replay_trace(header, records)
    if result.ok:
        print(result.message)
        return 0
    raise HarnessError(result.message)


def _cmd_validate(args, seed: int | None, overrides: dict[str, float]) -> int:
    scenario = load_scenario_file(args.scenario)
    grid = scenario.grid
    print(
        f"ok: {grid.width}x{grid.height} map, {len(scenario.agents)} agents, "
        f"seed {scenario.seed}"
    )
    return 0


def _cmd_serve(args, seed: int | None, overrides: dict[str, float]) -> int:
    import uvicorn

    from .service import create_app

    scenario = load_scenario_file(args.scenario)
    static = args.static
    if static is not None and not Path(static).is_dir():
        raise HarnessError(f"static directory not found: {static}")
    app = create_app(scenario, seed=seed, config_overrides=overrides, static_dir=static)
    print(f"serving on ws://{args.host}:{args.port}/ws")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stealthsim", description="deterministic stealth AI sandbox"
    )
    parser.add_argument("--seed", type=int, default=None, help="override scenario seed")
    parser.add_argument(
        "--config",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="headless run, trace + metrics")
    run.add_argument("--scenario", required=True)
    run.add_argument("--script", default=None, help="JSONL player input file")
    run.add_argument("--ticks", type=int, default=None)
    run.add_argument("--trace", default=None, help="trace output path")
    run.set_defaults(fn=_cmd_run)

    replay = sub.add_parser("replay", help="verify a trace file")
    replay.add_argument("--trace", required=True)
    replay.set_defaults(fn=_cmd_replay)

    serve = sub.add_parser("serve", help="websocket session service")
    serve.add_argument("--scenario", required=True)
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--static", default=None, help="directory of UI assets to host")
    serve.set_defaults(fn=_cmd_serve)

    validate = sub.add_parser("validate", help="parse a scenario, report errors")
    validate.add_argument("--scenario", required=True)
    validate.set_defaults(fn=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_config_flags(args.config)
        return args.fn(args, args.seed, overrides)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
