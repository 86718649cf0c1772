"""Command-line interface: plan single paths, run benchmark suites, generate maps.

Configuration precedence is flags > environment (GRIDGROUND_*) > config file
(--config, YAML) > built-in defaults. Exit codes: 0 success, 1 usage or
configuration error, 2 planning failed (no path / planner gave up). Nothing
touches the network unless the scorer is remote AND --allow-network is given.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import yaml

from . import bench
from .bundled import bundled_path
from .classical import PlannedPath, RrtParams, astar, path_length, rrt
from .errors import GridGroundError, MalformedReply
from .gridmap import Connectivity, GridPose, load_map, random_map, serialize_map
from .grounded import Instruction, PlannerConfig, plan as grounded_plan
from .scorers import ChatEndpointConfig, Cassette, MockScorer, OracleScorer, RemoteScorer
from . import translator

ENV_PREFIX = "GRIDGROUND_"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(message)


# option name -> converter; used for env and config-file layers
_OPTION_TYPES = {
    "planner": str,
    "scorer": str,
    "tau": float,
    "seed": int,
    "connectivity": int,
    "max_steps": int,
    "parallelism": int,
    "out_dir": str,
    "suite": str,
}

_DEFAULTS = {
    "planner": "astar",
    "scorer": "mock",
    "tau": 0.5,
    "seed": 0,
    "connectivity": 4,
    "max_steps": None,
    "parallelism": 1,
    "out_dir": "out",
    "suite": None,
}


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}")
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise _UsageError(f"config file {path} must be a mapping")
    return doc


def _resolve(name: str, flag_value, file_cfg: dict):
    """flags > env > file > defaults for one option."""
    if flag_value is not None:
        return flag_value
    conv = _OPTION_TYPES[name]
    env_val = os.environ.get(ENV_PREFIX + name.upper())
    if env_val is not None:
        try:
            return conv(env_val)
        except ValueError:
            raise _UsageError(f"bad value {env_val!r} for {ENV_PREFIX + name.upper()}")
    if name in file_cfg and file_cfg[name] is not None:
        try:
            return conv(file_cfg[name])
        except (TypeError, ValueError):
            raise _UsageError(f"bad config-file value {file_cfg[name]!r} for {name}")
    return _DEFAULTS[name]


def _parse_xy(text: str, label: str) -> GridPose:
    parts = text.split(",")
    try:
        x, y = int(parts[0]), int(parts[1])
    except (ValueError, IndexError):
        raise _UsageError(f"{label} must be 'x,y', got {text!r}")
    if len(parts) != 2:
        raise _UsageError(f"{label} must be 'x,y', got {text!r}")
    return GridPose(x, y)


def _endpoint_config(file_cfg: dict) -> ChatEndpointConfig:
    remote = file_cfg.get("remote") or {}
    if not isinstance(remote, dict):
        raise _UsageError("config-file key 'remote' must be a mapping")
    return ChatEndpointConfig(
        base_url=remote.get("base_url", "https://api.openai.com/v1"),
        model_name=remote.get("model_name", "gpt-3.5-turbo"),
        api_key_env=remote.get("api_key_env", "API_KEY"),
        timeout=float(remote.get("timeout", 30.0)),
        max_retries=int(remote.get("max_retries", 3)),
        temperature=float(remote.get("temperature", 0.0)),
    )


def _make_scorer(scorer_name: str, tau: float, allow_network: bool, file_cfg: dict, cassette: str | None):
    if scorer_name == "mock":
        return MockScorer(tau=tau)
    if scorer_name == "oracle":
        return OracleScorer()
    if scorer_name == "remote":
        cass = Cassette(cassette) if cassette else None
        if cass is None and not allow_network:
            raise _UsageError("scorer 'remote' requires --allow-network (or --cassette for replay)")
        cfg = _endpoint_config(file_cfg)
        if cass is None and not os.environ.get(cfg.api_key_env):
            raise _UsageError(f"remote scorer needs the {cfg.api_key_env} environment variable")
        return RemoteScorer(cfg, cassette=cass)
    raise _UsageError(f"unknown scorer {scorer_name!r} (expected mock, oracle, or remote)")


def cmd_plan(args) -> int:
    file_cfg = _load_config_file(args.config)
    planner = _resolve("planner", args.planner, file_cfg)
    scorer_name = _resolve("scorer", args.scorer, file_cfg)
    tau = _resolve("tau", args.tau, file_cfg)
    seed = _resolve("seed", args.seed, file_cfg)
    connectivity = _resolve("connectivity", args.connectivity, file_cfg)
    max_steps = _resolve("max_steps", args.max_steps, file_cfg)
    if connectivity not in (4, 8):
        raise _UsageError(f"connectivity must be 4 or 8, got {connectivity}")

    try:
        grid = load_map(Path(args.map).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _UsageError(f"cannot read map {args.map}: {exc}")
    start = _parse_xy(args.start, "--start")
    goal = _parse_xy(args.goal, "--goal")
    conn = Connectivity.FOUR if connectivity == 4 else Connectivity.EIGHT

    t0 = time.perf_counter()
    try:
        if planner == "astar":
            path = astar(grid, start, goal, conn)
        elif planner == "rrt":
            path = rrt(grid, start, goal, RrtParams(seed=seed))
        elif planner == "grounded":
            scorer = _make_scorer(scorer_name, tau, args.allow_network, file_cfg, args.cassette)
            result = grounded_plan(
                scorer, grid, start, Instruction(args.instruction, goal),
                PlannerConfig(max_steps=max_steps),
            )
            if not result.succeeded:
                elapsed_ms = (time.perf_counter() - t0) * 1000.0
                print(
                    f"planning failed: {result.failure.value} ({result.detail}) "
                    f"after {len(result.path.waypoints) - 1} steps in {elapsed_ms:.3f} ms",
                    file=sys.stderr,
                )
                return 2
            path = result.path
        elif planner == "fullpath":
            instruction = Instruction(args.instruction, goal)
            if scorer_name == "mock":
                reply = bench.fullpath_mock_reply(grid, start, instruction)
            elif scorer_name == "oracle":
                reply = bench.fullpath_oracle_reply(grid, start, instruction)
            else:
                scorer = _make_scorer(scorer_name, tau, args.allow_network, file_cfg, args.cassette)
                prompt = translator.serialize_fullpath_prompt(grid, start, instruction)
                reply = scorer.complete_text(prompt)
            try:
                path = PlannedPath(translator.parse_coordinate_list(reply).waypoints, grid.resolution)
            except MalformedReply as exc:
                print(f"planning failed: {exc}", file=sys.stderr)
                return 2
        else:
            raise _UsageError(f"unknown planner {planner!r} (expected astar, rrt, grounded, or fullpath)")
    except GridGroundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    if path is None:
        print("no path found", file=sys.stderr)
        return 2
    for p in path.waypoints:
        print(f"({p.x},{p.y})")
    steps = len(path.waypoints) - 1
    print(
        f"planned {steps} steps, length {path_length(path):.3f} m, {elapsed_ms:.3f} ms",
        file=sys.stderr,
    )
    return 0


def cmd_bench(args) -> int:
    file_cfg = _load_config_file(args.config)
    suite = _resolve("suite", args.suite, file_cfg)
    out_dir = _resolve("out_dir", args.out_dir, file_cfg)
    parallelism = _resolve("parallelism", args.parallelism, file_cfg)
    suite_path = Path(suite) if suite else bundled_path("default_suite.yaml")
    try:
        rows, report = bench.run_suite_file(suite_path, out_dir, parallelism)
    except GridGroundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(bench.format_report(report), end="")
    print(f"wrote {len(rows)} trial rows under {out_dir}", file=sys.stderr)
    return 0


def cmd_gen_maps(args) -> int:
    file_cfg = _load_config_file(args.config)
    out_dir = Path(_resolve("out_dir", args.out_dir, file_cfg))
    seed = _resolve("seed", args.seed, file_cfg)
    try:
        w_tok, h_tok = args.size.lower().split("x")
        width, height = int(w_tok), int(h_tok)
    except ValueError:
        raise _UsageError(f"--size must be WIDTHxHEIGHT, got {args.size!r}")
    if args.count < 1:
        raise _UsageError(f"--count must be >= 1, got {args.count}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for i in range(args.count):
            grid = random_map(width, height, args.density, seed + i)
            name = f"map_{width}x{height}_d{args.density:g}_s{seed + i}.map"
            (out_dir / name).write_text(serialize_map(grid), encoding="utf-8")
    except GridGroundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.count} maps under {out_dir}", file=sys.stderr)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="gridground", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="plan one path and print its waypoints")
    p_plan.add_argument("--map", required=True, help="ASCII map file")
    p_plan.add_argument("--start", required=True, help="start cell as x,y")
    p_plan.add_argument("--goal", required=True, help="goal cell as x,y")
    p_plan.add_argument("--planner", choices=["astar", "rrt", "grounded", "fullpath"])
    p_plan.add_argument("--scorer", choices=["mock", "oracle", "remote"])
    p_plan.add_argument("--tau", type=float)
    p_plan.add_argument("--seed", type=int)
    p_plan.add_argument("--connectivity", type=int, choices=[4, 8])
    p_plan.add_argument("--max-steps", dest="max_steps", type=int)
    p_plan.add_argument("--instruction", default="reach the goal cell")
    p_plan.add_argument("--cassette", help="replay cassette for the remote scorer")
    p_plan.add_argument("--allow-network", action="store_true")
    p_plan.add_argument("--config", help="YAML config file")
    p_plan.set_defaults(func=cmd_plan)

    p_bench = sub.add_parser("bench", help="run a benchmark suite")
    p_bench.add_argument("--suite", help="suite file (default: bundled suite)")
    p_bench.add_argument("--out-dir", dest="out_dir")
    p_bench.add_argument("--parallelism", type=int)
    p_bench.add_argument("--allow-network", action="store_true")
    p_bench.add_argument("--config", help="YAML config file")
    p_bench.set_defaults(func=cmd_bench)

    p_gen = sub.add_parser("gen-maps", help="generate random maps")
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--size", required=True, help="WIDTHxHEIGHT, e.g. 20x20")
    p_gen.add_argument("--density", type=float, required=True)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--out-dir", dest="out_dir")
    p_gen.add_argument("--config", help="YAML config file")
    p_gen.set_defaults(func=cmd_gen_maps)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
