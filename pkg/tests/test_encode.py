import re
from decimal import Decimal

import pytest

from smtnav.encode import (
    EncodingKind,
    EncodingStats,
    KinematicParams,
    PlanningProblem,
    count_stats,
    encode_kinematic,
    encode_pwl,
    reachable_headings,
    smt_num,
)
from smtnav.geometry import ObstacleRect, Pose, find_separating_line
from smtnav.solver import SolverStatus, decode_plan, run_solver

from .conftest import requires_z3

WS = (0.0, 0.0, 10.0, 10.0)


def problem(M=2, obstacles=(ObstacleRect(4, 4, 6, 6),), init=Pose(1, 1), goal=Pose(9, 9), v=5, ws=WS):
    return PlanningProblem(init, goal, M, v, 0.5, ws, obstacles)


def declared(text):
    return re.findall(r"^\(declare-(?:const|fun) (\S+)", text, flags=re.M)


def test_pwl_variable_count_example():
    script = encode_pwl(problem(M=2))
    names = declared(script.text)
    assert len(names) == 12
    assert list(script.variable_names) == names
    assert script.stats.num_variables == 12
    assert script.encoding_kind is EncodingKind.PWL


def test_pwl_without_obstacles_has_no_lines():
    script = encode_pwl(problem(M=3, obstacles=()))
    assert not any(n[0] in "abc" for n in script.variable_names)
    assert "not (and" not in script.text and "(or (and (<" not in script.text


def test_pwl_structure():
    text = encode_pwl(problem(M=2)).text
    assert "(set-logic QF_NRA)" in text
    assert "(set-option :pp.decimal_precision 6)" in text
    assert text.rstrip().endswith("(get-value (x_0 y_0 x_1 y_1 x_2 y_2))")
    assert text.index("(check-sat)") < text.index("(get-value")


@pytest.mark.parametrize("N", range(6))
def test_pwl_variable_scaling(N):
    obstacles = [ObstacleRect(1 + j, 5, 1.5 + j, 6) for j in range(N)]
    counts = [count_stats(encode_pwl(problem(M=M, obstacles=obstacles, init=Pose(0.2, 0.2), goal=Pose(9.8, 0.2)))).num_variables for M in range(1, 11)]
    slopes = {b - a for a, b in zip(counts, counts[1:])}
    assert slopes == {2 + 3 * N}
    assert counts[0] == 2 * 2 + 3 * N


def test_count_stats_counts_top_level_forms_only():
    assert count_stats("") == EncodingStats(0, 0)
    text = "; (assert x)\n(declare-const x Real)\n(declare-fun y () Real)\n(assert (and (> x 0) (assert-like y)))\n"
    assert count_stats(text) == EncodingStats(num_constraints=1, num_variables=2)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(init=Pose(5, 5)),
        dict(goal=Pose(4, 6)),
        dict(v=10),
        dict(v=0),
        dict(M=0),
        dict(goal=Pose(11, 5)),
    ],
)
def test_problem_preconditions(kwargs):
    with pytest.raises(ValueError):
        encode_pwl(problem(**kwargs))


@pytest.mark.parametrize(
    "value, text",
    [(1.5, "1.5"), (-2, "(- 2.0)"), (1e-05, "0.00001"), (6.46, "6.46"), (Decimal("-0.7"), "(- 0.7)")],
)
def test_smt_num(value, text):
    assert smt_num(value) == text


def test_reachable_headings_one_step():
    hs = reachable_headings(0.0, KinematicParams().rotations, 1)
    assert [float(h) for h in hs] == [-6, -4.5, -3, -1.5, 0, 1.5, 3, 4.5, 6]


def test_reachable_headings_wrap():
    hs = reachable_headings(178.5, (3.0, -3.0), 1)
    assert Decimal("-178.5") in hs and Decimal("175.5") in hs


def test_kinematic_params_validation():
    with pytest.raises(ValueError):
        KinematicParams(rotations=(6.0, 3.0))
    with pytest.raises(ValueError):
        KinematicParams(v_x=0)


def test_turn_minimisation_requires_omt():
    p = PlanningProblem(Pose(0, 0, 0), Pose(6.46, 0, 0), 3, 5, 0, (-20, -20, 20, 20))
    with pytest.raises(ValueError):
        encode_kinematic(p, minimize_turns=True, supports_omt=False)
    text = encode_kinematic(p, minimize_turns=True).text
    assert "(maximize (+ m_0 m_1))" in text
    assert "maximize" not in encode_kinematic(p).text


@requires_z3
def test_goal_equal_init_is_sat():
    res = run_solver(encode_pwl(problem(M=1, init=Pose(2, 2), goal=Pose(2, 2))))
    assert res.status is SolverStatus.SAT
    assert decode_plan(res, 1).waypoints == ((2, 2),)
    # longer budgets may wander but must end where they started
    res = run_solver(encode_pwl(problem(M=3, init=Pose(2, 2), goal=Pose(2, 2))))
    assert (res.model["x_3"], res.model["y_3"]) == (2, 2)


@requires_z3
def test_witness_plan_keeps_script_sat():
    # hand-built detour around the square, each leg certified by a separating line
    p = problem(M=3, v=6)
    plan = [(1, 1), (3.25, 6.75), (6.75, 6.75), (9, 9)]
    for a, b in zip(plan, plan[1:]):
        for rect in p.obstacles:
            assert find_separating_line(a, b, rect) is not None
    script = encode_pwl(p)
    pins = "".join(f"(assert (= x_{t} {smt_num(x)}))(assert (= y_{t} {smt_num(y)}))\n" for t, (x, y) in enumerate(plan))
    text = script.text.replace("(check-sat)", pins + "(check-sat)")
    assert run_solver(text).status is SolverStatus.SAT


@requires_z3
def test_kinematic_single_forward_step():
    p = PlanningProblem(Pose(0, 0, 0), Pose(6.46, 0, 0), 1, 5, 0, (-20, -20, 20, 20))
    res = run_solver(encode_kinematic(p))
    assert res.status is SolverStatus.SAT
    plan = decode_plan(res, 1, kinematic=True)
    assert plan.waypoints == ((0.0, 0.0, 0.0), (6.46, 0.0, 0.0))


@requires_z3
def test_kinematic_unreachable_heading_is_unsat():
    p = PlanningProblem(Pose(0, 0, 0), Pose(0, 0, 0.7), 1, 5, 0, (-20, -20, 20, 20))
    assert run_solver(encode_kinematic(p)).status is SolverStatus.UNSAT
