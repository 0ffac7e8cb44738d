"""Scenario runner and comparison tables for the SMT and graph-search planners."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .encode import EncodingKind, KinematicParams, PlanningProblem
from .geometry import ObstacleRect, Pose, wrap_degrees
from .graph import astar_plan, bfs_plan, decompose
from .gridmap import OccupancyGrid, extract_obstacles, inflate_obstacles, load_map, scale_rects
from .plan import GraphStats, MotionPlan, NoPlan, Planner, validate_plan
from .solver import SOLVER_ENV_VAR, SolverConfig, SolverFailure, plan_with_deepening

logger = logging.getLogger(__name__)

BUNDLED_SCENARIOS = Path(__file__).parent / "data"

_SMT_KIND = {
    Planner.SMT: EncodingKind.PWL,
    Planner.SMT_KINEMATIC: EncodingKind.KINEMATIC,
    Planner.SMT_KINEMATIC_OPT: EncodingKind.KINEMATIC_OPTIMIZED,
}


@dataclass(frozen=True)
class Scenario:
    """One planning query. Lengths are world units; the map is scaled by ``units_per_meter``."""

    name: str
    init: Pose
    goal: Pose
    map_path: Optional[Path] = None
    workspace: Optional[Tuple[float, float, float, float]] = None
    obstacles: Tuple[ObstacleRect, ...] = ()  # extra rectangles, already in world units
    units_per_meter: float = 1.0
    m_min: int = 1
    m_max: int = 10
    v: float = 1.0
    r: float = 0.0
    cell_size: float = 1.0
    planners: Tuple[Planner, ...] = (Planner.SMT, Planner.BFS, Planner.ASTAR)
    solver: Optional[str] = None
    timeout: float = 60.0
    seed: int = 0
    split: bool = False
    kinematic: KinematicParams = KinematicParams()

    def __post_init__(self):
        object.__setattr__(self, "planners", tuple(Planner(p) for p in self.planners))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not self.planners:
            raise ValueError("select at least one planner")
        if not (1 <= self.m_min <= self.m_max):
            raise ValueError("need 1 <= m_min <= m_max")
        if self.map_path is None and self.workspace is None:
            raise ValueError("a scenario without a map needs an explicit workspace")

    @classmethod
    def from_dict(cls, d: dict, base: Optional[Path] = None) -> "Scenario":
        def pose(v):
            v = list(v) + [0.0] * (3 - len(v))
            return Pose(float(v[0]), float(v[1]), wrap_degrees(float(v[2])))

        map_path = d.get("map")
        if map_path is not None:
            map_path = Path(map_path)
            if base is not None and not map_path.is_absolute():
                map_path = base / map_path
        kin = d.get("kinematic") or {}
        return cls(
            name=d.get("name", "scenario"),
            init=pose(d["init"]),
            goal=pose(d["goal"]),
            map_path=map_path,
            workspace=tuple(d["workspace"]) if d.get("workspace") else None,
            obstacles=tuple(ObstacleRect.from_dict(o) for o in d.get("obstacles", ())),
            units_per_meter=float(d.get("units_per_meter", 1.0)),
            m_min=int(d.get("m_min", 1)),
            m_max=int(d.get("m_max", 10)),
            v=float(d.get("v", 1.0)),
            r=float(d.get("r", 0.0)),
            cell_size=float(d.get("cell_size", 1.0)),
            planners=tuple(d.get("planners", ("smt", "bfs", "astar"))),
            solver=d.get("solver"),
            timeout=float(d.get("timeout", 60.0)),
            seed=int(d.get("seed", 0)),
            split=bool(d.get("split", False)),
            kinematic=KinematicParams(**kin),
        )

    def solver_config(self) -> SolverConfig:
        command = os.environ.get(SOLVER_ENV_VAR) or self.solver
        return SolverConfig.from_env(timeout=self.timeout, command=command)


def load_scenario(path, map_override=None) -> Scenario:
    path = Path(path)
    d = json.loads(path.read_text())
    if map_override is not None:
        d["map"] = str(Path(map_override).resolve())
    return Scenario.from_dict(d, base=path.parent)


@dataclass(frozen=True)
class PlannerResult:
    """Outcome of one planner; a plan only counts as ``ok`` once it has validated."""

    planner: Planner
    status: str  # ok | no-plan | invalid | error
    reason: str = ""
    plan: Optional[MotionPlan] = None
    time_s: float = 0.0
    encode_time_s: float = 0.0
    num_constraints: Optional[int] = None
    num_variables: Optional[int] = None
    nodes: Optional[int] = None
    edges: Optional[int] = None
    expanded: Optional[int] = None
    valid: bool = False

    def __post_init__(self):
        if self.status == "ok" and not (self.plan is not None and self.valid):
            raise ValueError("an ok result needs a validated plan")

    @property
    def waypoints(self) -> Optional[int]:
        return len(self.plan.waypoints) if self.plan is not None else None

    @property
    def path_length(self) -> Optional[float]:
        return self.plan.length if self.plan is not None else None


@dataclass(frozen=True)
class Report:
    scenario: str
    workspace: Tuple[float, float, float, float]
    init: Pose
    goal: Pose
    obstacles: Tuple[ObstacleRect, ...]
    results: Tuple[PlannerResult, ...]
    grid: Optional[OccupancyGrid] = field(default=None, repr=False)
    units_per_meter: float = 1.0

    def ok_plans(self) -> List[MotionPlan]:
        return [r.plan for r in self.results if r.status == "ok"]


def scenario_geometry(scenario: Scenario):
    """(grid, workspace, inflated obstacles) for a scenario."""
    grid = load_map(scenario.map_path) if scenario.map_path is not None else None
    rects: List[ObstacleRect] = []
    if grid is not None:
        rects = scale_rects(extract_obstacles(grid, split=scenario.split), scenario.units_per_meter)
    rects += list(scenario.obstacles)
    workspace = scenario.workspace
    if workspace is None:
        workspace = tuple(v * scenario.units_per_meter for v in grid.extent)
    workspace = tuple(float(v) for v in workspace)
    return grid, workspace, inflate_obstacles(rects, scenario.r, workspace)


def _result_from(planner: Planner, outcome: Union[MotionPlan, NoPlan], obstacles) -> PlannerResult:
    stats = outcome.stats
    extra = {}
    if isinstance(stats, GraphStats):
        extra = dict(nodes=stats.nodes, edges=stats.edges, expanded=stats.expanded)
    elif stats is not None:
        extra = dict(num_constraints=stats.num_constraints, num_variables=stats.num_variables)
    if isinstance(outcome, NoPlan):
        reason = outcome.reason
        if outcome.attempts:
            reason += " (" + ", ".join(f"M={m}:{s}" for m, s in outcome.attempts) + ")"
        return PlannerResult(planner, "no-plan", reason, None, outcome.solve_time, **extra)
    report = validate_plan(outcome, obstacles)
    status = "ok" if report.ok else "invalid"
    reason = "" if report.ok else f"violation {report.violation}"
    return PlannerResult(
        planner, status, reason, outcome, outcome.solve_time, outcome.encode_time, valid=report.ok, **extra
    )


def run_scenario(scenario: Scenario) -> Report:
    """Map -> obstacles -> inflation -> each selected planner -> validation."""
    grid, workspace, obstacles = scenario_geometry(scenario)
    results = []
    graph = None
    config = None
    for planner in scenario.planners:
        try:
            if planner in _SMT_KIND:
                config = config or scenario.solver_config()
                problem = PlanningProblem(
                    scenario.init, scenario.goal, scenario.m_min, scenario.v, scenario.r, workspace, obstacles
                )
                outcome = plan_with_deepening(
                    problem, scenario.m_min, scenario.m_max, _SMT_KIND[planner], config, scenario.kinematic
                )
            else:
                if graph is None:
                    graph = decompose(workspace, obstacles, scenario.cell_size)
                search = bfs_plan if planner is Planner.BFS else astar_plan
                outcome = search(graph, scenario.init.position, scenario.goal.position)
            results.append(_result_from(planner, outcome, obstacles))
        except (ValueError, SolverFailure) as exc:
            logger.warning("%s/%s failed: %s", scenario.name, planner.value, exc)
            results.append(PlannerResult(planner, "error", str(exc)))
    return Report(
        scenario.name, workspace, scenario.init, scenario.goal, tuple(obstacles), tuple(results), grid,
        scenario.units_per_meter,
    )


def run_batch(scenarios: Sequence[Scenario], workers: int = 1) -> List[Report]:
    """Run scenarios (concurrently when ``workers`` > 1); order follows the input."""
    if workers <= 1:
        return [run_scenario(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_scenario, scenarios))


TABLE_COLUMNS = (
    "scenario", "planner", "status", "constraints", "variables", "nodes", "edges", "expanded",
    "encode_s", "time_s", "waypoints", "path_length", "valid",
)
TIME_COLUMNS = ("encode_s", "time_s")


def _fmt(v, digits=3) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def table_rows(reports: Sequence[Report], include_times: bool = True) -> List[dict]:
    rows = []
    for rep in reports:
        for res in rep.results:
            smt = res.planner in _SMT_KIND
            rows.append(
                {
                    "scenario": rep.scenario,
                    "planner": res.planner.value,
                    "status": res.status,
                    "constraints": _fmt(res.num_constraints if smt else None),
                    "variables": _fmt(res.num_variables if smt else None),
                    "nodes": _fmt(None if smt else res.nodes),
                    "edges": _fmt(None if smt else res.edges),
                    "expanded": _fmt(None if smt else res.expanded),
                    "encode_s": _fmt(res.encode_time_s if smt and res.plan is not None else None),
                    "time_s": _fmt(res.time_s),
                    "waypoints": _fmt(res.waypoints),
                    "path_length": _fmt(res.path_length),
                    "valid": _fmt(res.valid),
                }
            )
    rows.sort(key=lambda r: (r["scenario"], r["planner"]))
    if not include_times:
        for r in rows:
            for c in TIME_COLUMNS:
                del r[c]
    return rows


def emit_table(reports: Sequence[Report], fmt: str = "markdown", include_times: bool = True) -> str:
    """Comparison table, one row per (scenario, planner), as markdown or CSV."""
    if not reports:
        raise ValueError("no reports to tabulate")
    rows = table_rows(reports, include_times)
    cols = [c for c in TABLE_COLUMNS if include_times or c not in TIME_COLUMNS]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    if fmt not in ("markdown", "md"):
        raise ValueError(f"unknown table format {fmt!r}")
    lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
    for r in rows:
        lines.append("| " + " | ".join(r[c] for c in cols) + " |")
    return "\n".join(lines) + "\n"
