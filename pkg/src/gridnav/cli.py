"""Command line front end.

    gridnav run <scenario> [--out DIR] [--seed N] [--no-figures]
    gridnav plan <map> --start X,Y --goal X,Y [--simplify] [--cost-weight W]
    gridnav serve <scenario> [--host H] [--port P] [--time-scale S]
    gridnav validate <map-or-scenario>

Exit codes: 0 success (run: goal REACHED), 1 usage or input errors,
2 run finished without reaching the goal. Verbosity comes from the
GRIDNAV_LOG environment variable (DEBUG/INFO/WARNING). The run subcommand
writes only below its --out directory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .global_planner import PlanningError, plan, simplify
from .costmap import build_static_costmap
from .navigator import Simulation
from .scenario import ScenarioError, load_scenario
from .world import MapParseError, load_world

log = logging.getLogger("gridnav.cli")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep usage errors at 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gridnav", description="2D indoor navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless and write the report")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_plan = sub.add_parser("plan", help="plan once on a map and print the path as JSON")
    p_plan.add_argument("map")
    p_plan.add_argument("--start", required=True, help="start as x,y")
    p_plan.add_argument("--goal", required=True, help="goal as x,y")
    p_plan.add_argument("--simplify", action="store_true", help="drop collinear-visible waypoints")
    p_plan.add_argument("--cost-weight", type=float, default=3.0)
    p_plan.add_argument("--inscribed-radius", type=float, default=0.22)
    p_plan.add_argument("--inflation-radius", type=float, default=0.55)
    p_plan.add_argument("--decay", type=float, default=10.0)

    p_serve = sub.add_parser("serve", help="serve a scenario over WebSocket with the console")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--time-scale", type=float, default=1.0,
                         help="sim seconds per wall second; 0 runs unpaced")

    p_val = sub.add_parser("validate", help="check a map or scenario file")
    p_val.add_argument("path")
    return parser


def _parse_xy(raw: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise _UsageError(f"expected x,y but got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _UsageError(str(exc))


def _cmd_run(args) -> int:
    cfg = load_scenario(args.scenario)
    if args.seed is not None:
        cfg.seed = args.seed
    sim = Simulation(cfg)
    result = sim.run()
    summary = _write_report(args.out, cfg, sim, result, figures=not args.no_figures)
    line = f"{result.result} after {len(result.records)} ticks ({result.wall_time:.1f} s wall)"
    if result.failure_reason:
        line += f", reason: {result.failure_reason}"
    if "tracking_error" in summary:
        te = summary["tracking_error"]
        line += (f", max|ex|={te['ex']['max_abs']:.3f} m"
                 f", max|ey|={te['ey']['max_abs']:.3f} m"
                 f", max|e|={te['e_norm']['max_abs']:.3f} m")
    print(line)
    print(f"report written to {args.out}")
    return 0 if result.result == "REACHED" else 2


def _write_report(out_dir, cfg, sim, result, figures):
    from .report import write_run_report
    return write_run_report(out_dir, cfg, sim.static_grid, sim.costmap, result,
                            figures=figures)


def _cmd_plan(args) -> int:
    grid, _ = load_world(args.map)
    costmap = build_static_costmap(grid, inscribed_radius=args.inscribed_radius,
                                   inflation_radius=args.inflation_radius,
                                   decay=args.decay)
    try:
        path = plan(costmap, _parse_xy(args.start), _parse_xy(args.goal),
                    cost_weight=args.cost_weight)
    except PlanningError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 2
    if args.simplify:
        path = simplify(path, costmap)
    print(json.dumps({"cost": path.cost,
                      "waypoints": [[x, y] for x, y in path.waypoints]}))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    cfg = load_scenario(args.scenario)
    app = create_app(cfg, time_scale=args.time_scale)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_validate(args) -> int:
    with open(args.path, "r", encoding="utf-8") as fh:
        text = fh.read()
    # A map body marker distinguishes the two formats.
    is_map = any(line.strip() == "map:" for line in text.split("\n"))
    if is_map:
        grid, landmarks = load_world(args.path)
        print(f"ok: map {grid.width}x{grid.height} @ {grid.resolution} m/cell, "
              f"{len(landmarks)} landmarks")
    else:
        cfg = load_scenario(args.path)
        grid, landmarks = load_world(cfg.map_path)
        print(f"ok: scenario seed {cfg.seed}, map {grid.width}x{grid.height}, "
              f"start ({cfg.start.x}, {cfg.start.y}), goal {cfg.goal}")
    return 0


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("GRIDNAV_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "serve":
            return _cmd_serve(args)
        return _cmd_validate(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MapParseError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
