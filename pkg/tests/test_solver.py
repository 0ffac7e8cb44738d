import random
import sys
from fractions import Fraction

import pytest

from smtnav.encode import EncodingKind, PlanningProblem, encode_pwl
from smtnav.geometry import ObstacleRect, Pose
from smtnav.plan import MotionPlan, NoPlan, Planner, validate_plan
from smtnav.solver import (
    ModelParseError,
    SolverConfig,
    SolverFailure,
    SolverResult,
    SolverStatus,
    decode_plan,
    parse_model,
    plan_with_deepening,
    run_solver,
)

from .conftest import requires_z3

WS = (0.0, 0.0, 10.0, 10.0)


@requires_z3
def test_empty_script_is_sat():
    res = run_solver("(check-sat)\n")
    assert res.status is SolverStatus.SAT and res.model == {}
    assert res.wall_time > 0


@requires_z3
def test_contradiction_is_unsat():
    res = run_solver("(declare-const x Real)\n(assert (and (> x 0) (< x 0)))\n(check-sat)\n")
    assert res.status is SolverStatus.UNSAT and res.model is None


@pytest.mark.parametrize(
    "text, expected",
    [
        ("((x_1 (/ 13 2)))", {"x_1": Fraction(13, 2)}),
        ("((x (- 3)) (y 0.25))", {"x": Fraction(-3), "y": Fraction(1, 4)}),
        ("((x (- 1.414213?))\n (y 0.333333?))", {"x": Fraction("-1.414213"), "y": Fraction("0.333333")}),
        ("((x (/ (- 7) 2)) (y (- (/ 1.0 4.0))))", {"x": Fraction(-7, 2), "y": Fraction(-1, 4)}),
        ("((|odd name| 12))", {"odd name": Fraction(12)}),
    ],
)
def test_parse_model_forms(text, expected):
    assert parse_model(text) == expected


@pytest.mark.parametrize("text", ["((x (root-obj (+ (^ x 2) (- 2)) 1)))", "((x 1 2))", "((x 1)"])
def test_parse_model_rejects(text):
    with pytest.raises(ModelParseError):
        parse_model(text)


def test_spawn_failure_is_solver_error():
    res = run_solver("(check-sat)", SolverConfig(command=("no-such-solver-binary", "-in")))
    assert res.status is SolverStatus.ERROR


def test_timeout_kills_child():
    cfg = SolverConfig(command=(sys.executable, "-c", "import time; time.sleep(10)"), timeout=0.5)
    res = run_solver("(check-sat)", cfg)
    assert res.status is SolverStatus.TIMEOUT
    assert res.wall_time < 5


def test_garbage_output_is_error_with_raw_text():
    cfg = SolverConfig(command=(sys.executable, "-c", "print('segfault?')"))
    res = run_solver("(check-sat)", cfg)
    assert res.status is SolverStatus.ERROR
    assert "segfault?" in res.raw_output


def test_script_passed_as_file_when_not_stdin():
    code = "import sys; print('sat' if open(sys.argv[1]).read().startswith('(check-sat)') else 'unsat')"
    res = run_solver("(check-sat)\n", SolverConfig(command=(sys.executable, "-c", code)))
    assert res.status is SolverStatus.SAT


def test_env_var_overrides_default(monkeypatch):
    monkeypatch.setenv("SMTNAV_SOLVER", "cvc5 --lang smt2")
    assert SolverConfig.from_env().command == ("cvc5", "--lang", "smt2")
    monkeypatch.delenv("SMTNAV_SOLVER")
    assert SolverConfig.from_env().command == ("z3", "-in", "-smt2")


def test_result_model_invariant():
    with pytest.raises(ValueError):
        SolverResult(SolverStatus.UNSAT, {"x": Fraction(1)})
    with pytest.raises(ValueError):
        SolverResult(SolverStatus.SAT, None)


def _sat(values):
    return SolverResult(SolverStatus.SAT, {k: Fraction(v) for k, v in values.items()})


def test_decode_collapses_stay():
    res = _sat({"x_0": 0, "y_0": 0, "x_1": 5, "y_1": 5, "x_2": 5, "y_2": 5})
    assert decode_plan(res, 2).waypoints == ((0, 0), (5, 5))


def test_decode_single_waypoint():
    assert decode_plan(_sat({"x_0": 1, "y_0": 2}), 0).waypoints == ((1, 2),)


def test_decode_kinematic_keeps_heading():
    res = _sat({"x_0": 0, "y_0": 0, "th_0": 0, "x_1": "6.46", "y_1": 0, "th_1": "-4.5"})
    plan = decode_plan(res, 1, kinematic=True)
    assert plan.waypoints == ((0, 0, 0), (6.46, 0, -4.5))
    assert plan.planner is Planner.SMT_KINEMATIC


def test_decode_missing_variable():
    with pytest.raises(ValueError):
        decode_plan(_sat({"x_0": 0, "y_0": 0}), 1)


def test_validate_examples():
    sq = [ObstacleRect(2, 2, 4, 4)]
    assert validate_plan(MotionPlan(((0, 0), (1, 0), (1, 1)), Planner.SMT), sq).ok
    rep = validate_plan(MotionPlan(((0, 5), (0, 3), (6, 3)), Planner.SMT), sq)
    assert not rep.ok
    assert (rep.violation.kind, rep.violation.index, rep.violation.obstacle) == ("segment", 1, 0)
    # grazing the closed boundary counts as a collision
    assert not validate_plan(MotionPlan(((0, 4), (6, 4)), Planner.SMT), sq).ok


def test_deepening_rejects_bad_range():
    p = PlanningProblem(Pose(1, 1), Pose(2, 2), 1, 3, 0, WS)
    with pytest.raises(ValueError):
        plan_with_deepening(p, 0, 3)
    with pytest.raises(ValueError):
        plan_with_deepening(p, 3, 2)


def test_deepening_propagates_solver_error():
    p = PlanningProblem(Pose(1, 1), Pose(2, 2), 1, 3, 0, WS)
    with pytest.raises(SolverFailure):
        plan_with_deepening(p, 1, 2, config=SolverConfig(command=("no-such-solver-binary", "-in")))


@requires_z3
def test_deepening_free_space_one_step():
    p = PlanningProblem(Pose(1, 1), Pose(3, 2), 1, 3, 0, WS)
    plan = plan_with_deepening(p, 1, 4)
    assert isinstance(plan, MotionPlan)
    assert plan.waypoints == ((1, 1), (3, 2))
    assert plan.stats.num_variables == 4


@requires_z3
def test_deepening_enclosed_goal():
    ring = [
        ObstacleRect(3, 3, 7, 3.5), ObstacleRect(3, 6.5, 7, 7),
        ObstacleRect(3, 3, 3.5, 7), ObstacleRect(6.5, 3, 7, 7),
    ]
    p = PlanningProblem(Pose(1, 1), Pose(5, 5), 1, 5, 0, WS, ring)
    out = plan_with_deepening(p, 1, 3)
    assert isinstance(out, NoPlan)
    assert out.attempts == ((1, "unsat"), (2, "unsat"), (3, "unsat"))


@requires_z3
def test_deepening_wall_needs_one_detour():
    wall = [ObstacleRect(4.5, 2, 5.5, 8)]
    p = PlanningProblem(Pose(1, 5), Pose(9, 5), 1, 9, 0, WS, wall)
    assert run_solver(encode_pwl(p)).status is SolverStatus.UNSAT
    plan = plan_with_deepening(p, 1, 4)
    assert isinstance(plan, MotionPlan) and len(plan.waypoints) == 3
    assert validate_plan(plan, wall).ok


def random_scenario(rng, max_obstacles=6):
    """Random rectangles (covering at most ~30% of a 10x10 box) with free init and goal."""
    from smtnav.geometry import point_in_rect

    while True:
        obstacles = []
        for _ in range(rng.randint(1, max_obstacles)):
            w, h = rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5)
            x, y = rng.uniform(0, 10 - w), rng.uniform(0, 10 - h)
            obstacles.append(ObstacleRect(x, y, x + w, y + h))
        if sum(o.width * o.height for o in obstacles) > 30:
            continue
        pts = []
        for _ in range(200):
            p = (round(rng.uniform(0, 10), 2), round(rng.uniform(0, 10), 2))
            if not any(point_in_rect(p, o) for o in obstacles):
                pts.append(p)
            if len(pts) == 2:
                break
        if len(pts) == 2:
            return Pose(*pts[0]), Pose(*pts[1]), obstacles


@requires_z3
@pytest.mark.slow
def test_deepening_returns_smallest_budget():
    rng = random.Random(11)
    checked = 0
    while checked < 20:
        init, goal, obstacles = random_scenario(rng, max_obstacles=4)
        p = PlanningProblem(init, goal, 1, 4, 0.0, WS, obstacles)
        plan = plan_with_deepening(p, 1, 6, config=SolverConfig(timeout=30))
        if not isinstance(plan, MotionPlan):
            continue
        assert validate_plan(plan, obstacles).ok
        M = next(m for m in range(1, 7) if 2 * (m + 1) + 3 * m * len(obstacles) == plan.stats.num_variables)
        if M > 1:
            assert run_solver(encode_pwl(p.with_budget(M - 1))).status is SolverStatus.UNSAT
        checked += 1
