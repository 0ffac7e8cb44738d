"""SMT-based and graph-search motion planning on occupancy-grid maps."""

from .controller import (
    ControllerParams,
    MotionPrimitive,
    NoiseModel,
    PrimitiveKind,
    apply_primitive,
    execute_plan,
    los_navigate,
    rotation_schedule,
)
from .encode import EncodingKind, KinematicParams, PlanningProblem, count_stats, encode_kinematic, encode_pwl
from .geometry import (
    ObstacleRect,
    Pose,
    SeparatingLine,
    effective_angle,
    find_separating_line,
    point_in_rect,
    segment_intersects_rect,
)
from .graph import CellGraph, astar_plan, bfs_plan, decompose, simplify
from .gridmap import (
    OccupancyGrid,
    cell_to_world,
    extract_obstacles,
    inflate_obstacles,
    load_map,
    parse_map,
    world_to_cell,
)
from .plan import MotionPlan, NoPlan, Planner, validate_plan
from .solver import SolverConfig, SolverStatus, decode_plan, plan_with_deepening, run_solver

__version__ = "0.1.0"
