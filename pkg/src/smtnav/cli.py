"""Command-line entry point: ``smtnav {plan,bench,simulate,extract}``.

Exit codes: 0 success, 1 no plan found, 2 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .bench import BUNDLED_SCENARIOS, emit_table, load_scenario, run_batch, run_scenario
from .controller import ControllerParams, NoiseModel, execute_plan
from .geometry import Pose, wrap_degrees
from .gridmap import MapFormatError, extract_obstacles, load_map, obstacles_to_json
from .plan import MotionPlan, Planner
from .render import render_svg

EXIT_OK, EXIT_NO_PLAN, EXIT_ERROR = 0, 1, 2


def _floats(text: str, n: int):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return parts


def _write_svg(path, report) -> None:
    svg = render_svg(
        report.grid, report.obstacles, report.ok_plans(), report.init, report.goal,
        workspace=report.workspace, scale=report.units_per_meter,
    )
    Path(path).write_text(svg)


def cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario, map_override=args.map)
    scenario = replace(scenario, planners=(Planner(args.planner),))
    report = run_scenario(scenario)
    res = report.results[0]
    if args.svg:
        _write_svg(args.svg, report)
    if res.status == "error":
        print(f"error: {res.reason}", file=sys.stderr)
        return EXIT_ERROR
    if res.status != "ok":
        print(f"no plan: {res.status} {res.reason}", file=sys.stderr)
        return EXIT_NO_PLAN
    Path(args.out).write_text(res.plan.to_json() + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    directory = Path(args.scenarios) if args.scenarios else BUNDLED_SCENARIOS
    paths = sorted(directory.glob("*.json"))
    if not paths:
        print(f"error: no scenario files in {directory}", file=sys.stderr)
        return EXIT_ERROR
    reports = run_batch([load_scenario(p) for p in paths], workers=args.workers)
    table = emit_table(reports, args.table)
    if args.out:
        Path(args.out).write_text(table)
    else:
        sys.stdout.write(table)
    if args.svg_dir:
        svg_dir = Path(args.svg_dir)
        svg_dir.mkdir(parents=True, exist_ok=True)
        for rep in reports:
            _write_svg(svg_dir / f"{rep.scenario}.svg", rep)
    if any(r.status == "error" for rep in reports for r in rep.results):
        return EXIT_ERROR
    return EXIT_OK


def cmd_simulate(args) -> int:
    plan = MotionPlan.from_dict(json.loads(Path(args.plan).read_text()))
    x, y, th = args.init
    params = ControllerParams(
        step_length=args.step_length, backstep_distance=args.backstep, calibrated=args.calibrated
    )
    noise = None
    if args.noise is not None:
        noise = NoiseModel.seeded(args.noise[0], args.noise[1], args.seed)
    traj = execute_plan(plan, Pose(x, y, wrap_degrees(th)), params, noise)
    Path(args.trace).write_text(traj.to_json() + "\n")
    if args.errors_csv:
        Path(args.errors_csv).write_text(traj.errors_csv())
    return EXIT_OK


def cmd_extract(args) -> int:
    rects = extract_obstacles(load_map(args.map), split=args.split)
    text = obstacles_to_json(rects)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smtnav", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan one scenario with one planner")
    p.add_argument("--map", help="map YAML (overrides the scenario's map)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planner", required=True, choices=[pl.value for pl in Planner])
    p.add_argument("--out", required=True, help="plan JSON output")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run every scenario in a directory and tabulate")
    b.add_argument("--scenarios", help="directory of scenario JSON files (default: bundled)")
    b.add_argument("--table", choices=["md", "markdown", "csv"], default="md")
    b.add_argument("--out")
    b.add_argument("--svg-dir")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("simulate", help="execute a plan with the line-of-sight controller")
    s.add_argument("--plan", required=True)
    s.add_argument("--init", required=True, type=lambda t: _floats(t, 3), help="x,y,theta")
    s.add_argument("--noise", type=lambda t: _floats(t, 2), help="sigma_pos,sigma_ang")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", required=True)
    s.add_argument("--errors-csv")
    s.add_argument("--step-length", type=float, default=6.46)
    s.add_argument("--backstep", type=float, default=0.0)
    s.add_argument("--calibrated", action="store_true")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("extract", help="print the obstacle rectangles of a map as JSON")
    e.add_argument("--map", required=True)
    e.add_argument("--split", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_extract)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (OSError, ValueError, MapFormatError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
