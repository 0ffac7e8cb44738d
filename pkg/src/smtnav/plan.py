"""Motion plans shared by every planner, plus the geometric plan validator."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .geometry import ObstacleRect, path_length, point_in_rect, segment_intersects_rect


class Planner(str, enum.Enum):
    SMT = "smt"
    SMT_KINEMATIC = "smt-kin"
    SMT_KINEMATIC_OPT = "smt-kin-opt"
    BFS = "bfs"
    ASTAR = "astar"


@dataclass(frozen=True)
class GraphStats:
    nodes: int
    edges: int
    expanded: int
    cost: float


@dataclass(frozen=True)
class MotionPlan:
    """Ordered waypoints, either (x, y) or (x, y, theta)."""

    waypoints: Tuple[Tuple[float, ...], ...]
    planner: Planner
    stats: object = None
    solve_time: float = 0.0
    encode_time: float = 0.0

    def __post_init__(self):
        wps = tuple(tuple(float(v) for v in w) for w in self.waypoints)
        if not wps:
            raise ValueError("a motion plan needs at least one waypoint")
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "planner", Planner(self.planner))

    @property
    def points(self) -> List[Tuple[float, float]]:
        return [(w[0], w[1]) for w in self.waypoints]

    @property
    def length(self) -> float:
        return path_length(self.waypoints)

    def to_dict(self) -> dict:
        d = {
            "planner": self.planner.value,
            "waypoints": [list(w) for w in self.waypoints],
            "solve_time_s": self.solve_time,
            "encode_time_s": self.encode_time,
        }
        stats = self.stats
        if stats is not None and hasattr(stats, "num_constraints"):
            d["num_constraints"] = stats.num_constraints
            d["num_variables"] = stats.num_variables
        elif isinstance(stats, GraphStats):
            d.update(nodes=stats.nodes, edges=stats.edges, expanded=stats.expanded, cost=stats.cost)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "MotionPlan":
        return cls(
            waypoints=d["waypoints"],
            planner=d["planner"],
            solve_time=float(d.get("solve_time_s", 0.0)),
            encode_time=float(d.get("encode_time_s", 0.0)),
        )


@dataclass(frozen=True)
class NoPlan:
    """No plan found; ``attempts`` holds (budget, status) pairs where relevant."""

    reason: str
    attempts: Tuple[Tuple[int, str], ...] = ()
    stats: object = None
    solve_time: float = 0.0


@dataclass(frozen=True)
class Violation:
    kind: str  # "point" or "segment"
    index: int  # waypoint index, or index of the segment's first waypoint
    obstacle: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: Optional[Violation] = None
    violations: Tuple[Violation, ...] = field(default=(), repr=False)


def validate_plan(plan: MotionPlan, obstacles: Sequence[ObstacleRect]) -> ValidationReport:
    """Check every waypoint and every joining segment against the (inflated) obstacles."""
    pts = plan.points
    found = []
    for i, p in enumerate(pts):
        for j, rect in enumerate(obstacles):
            if point_in_rect(p, rect):
                found.append(Violation("point", i, j))
    for i, (p, q) in enumerate(zip(pts, pts[1:])):
        for j, rect in enumerate(obstacles):
            if segment_intersects_rect(p, q, rect):
                found.append(Violation("segment", i, j))
    if not found:
        return ValidationReport(True)
    return ValidationReport(False, found[0], tuple(found))
