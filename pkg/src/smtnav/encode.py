"""SMT-LIB 2 emission for the waypoint (piecewise-linear) and kinematic planning encodings."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import List, Optional, Sequence, Tuple

from .geometry import ObstacleRect, Pose, point_in_rect

Workspace = Tuple[float, float, float, float]

DEFAULT_ROTATIONS = (6.0, 4.5, 3.0, 1.5, -6.0, -4.5, -3.0, -1.5)


class EncodingKind(str, enum.Enum):
    PWL = "pwl"
    KINEMATIC = "kinematic"
    KINEMATIC_OPTIMIZED = "kinematic-opt"


@dataclass(frozen=True)
class EncodingStats:
    num_constraints: int = 0
    num_variables: int = 0


@dataclass(frozen=True)
class PlanningProblem:
    """Source/goal query over a rectangular workspace with inflated obstacles.

    ``M`` is the waypoint budget (waypoints 0..M), ``v`` the per-step bound on
    |dx| and |dy|, ``r`` the inflation already applied to ``obstacles``.
    """

    init: Pose
    goal: Pose
    M: int
    v: float
    r: float
    workspace: Workspace
    obstacles: Tuple[ObstacleRect, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "workspace", tuple(float(w) for w in self.workspace))

    def with_budget(self, M: int) -> "PlanningProblem":
        return PlanningProblem(self.init, self.goal, M, self.v, self.r, self.workspace, self.obstacles)

    def validate(self) -> None:
        x0, y0, x1, y1 = self.workspace
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"empty workspace {self.workspace}")
        if self.M < 1:
            raise ValueError(f"waypoint budget M must be >= 1, got {self.M}")
        if not (0 < self.v < min(x1 - x0, y1 - y0)):
            raise ValueError(f"v={self.v} must lie in (0, min(width, height))")
        for name, pose in (("init", self.init), ("goal", self.goal)):
            if not (x0 <= pose.x <= x1 and y0 <= pose.y <= y1):
                raise ValueError(f"{name} {pose.position} outside workspace")
            for j, rect in enumerate(self.obstacles):
                if point_in_rect(pose.position, rect):
                    raise ValueError(f"{name} {pose.position} lies inside obstacle {j}")


@dataclass(frozen=True)
class KinematicParams:
    v_x: float = 6.46
    v_y: float = 6.46
    rotations: Tuple[float, ...] = DEFAULT_ROTATIONS
    goal_tolerance: float = 0.5

    def __post_init__(self):
        if self.v_x <= 0 or self.v_y <= 0:
            raise ValueError("step speeds must be positive")
        rots = tuple(float(r) for r in self.rotations)
        if not rots or sorted(rots) != sorted(-r for r in rots) or 0.0 in rots:
            raise ValueError("rotations must be nonempty, nonzero and symmetric about 0")
        object.__setattr__(self, "rotations", rots)
        if self.goal_tolerance < 0:
            raise ValueError("goal_tolerance must be non-negative")


@dataclass(frozen=True)
class SmtScript:
    text: str
    variable_names: Tuple[str, ...]
    stats: EncodingStats
    encoding_kind: EncodingKind
    M: int
    headings: Tuple[Decimal, ...] = field(default=(), repr=False)


def smt_num(value) -> str:
    """Exact SMT-LIB rendering of a finite number (decimal, never scientific)."""
    d = value if isinstance(value, Decimal) else Decimal(repr(float(value)))
    if not d.is_finite():
        raise ValueError(f"cannot encode {value!r}")
    text = format(abs(d), "f")
    if "." not in text:
        text += ".0"
    return f"(- {text})" if d < 0 else text


def _top_level_forms(text: str):
    depth = 0
    start = None
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            i = text.index('"', i + 1) + 1
            continue
        if ch == "|":
            i = text.index("|", i + 1) + 1
            continue
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                yield text[start:i + 1]
        i += 1


def count_stats(script) -> EncodingStats:
    """Count top-level ``assert`` commands and constant declarations in a script."""
    text = script.text if isinstance(script, SmtScript) else script
    n_assert = n_decl = 0
    for form in _top_level_forms(text):
        head = form[1:].split(None, 1)[0] if len(form) > 2 else ""
        if head == "assert":
            n_assert += 1
        elif head in ("declare-const", "declare-fun"):
            n_decl += 1
    return EncodingStats(num_constraints=n_assert, num_variables=n_decl)


class _Emitter:
    def __init__(self, decimal_precision: Optional[int]):
        self.lines: List[str] = []
        self.names: List[str] = []
        if decimal_precision is not None:
            self.lines.append("(set-option :pp.decimal true)")
            self.lines.append(f"(set-option :pp.decimal_precision {int(decimal_precision)})")
        self.lines.append("(set-logic QF_NRA)")

    def declare(self, name: str, sort: str = "Real") -> str:
        self.names.append(name)
        self.lines.append(f"(declare-const {name} {sort})")
        return name

    def comment(self, text: str) -> None:
        self.lines.append(f"; {text}")

    def assert_(self, term: str) -> None:
        self.lines.append(f"(assert {term})")

    def finish(self, kind: EncodingKind, M: int, values: Sequence[str], extra=(), headings=()) -> SmtScript:
        self.lines.extend(extra)
        self.lines.append("(check-sat)")
        if values:
            self.lines.append(f"(get-value ({' '.join(values)}))")
        text = "\n".join(self.lines) + "\n"
        return SmtScript(text, tuple(self.names), count_stats(text), kind, M, tuple(headings))


def _and(*terms: str) -> str:
    return terms[0] if len(terms) == 1 else f"(and {' '.join(terms)})"


def _or(*terms: str) -> str:
    return terms[0] if len(terms) == 1 else f"(or {' '.join(terms)})"


def _outside(x: str, y: str, rect: ObstacleRect) -> str:
    inside = _and(
        f"(>= {x} {smt_num(rect.x_bl)})",
        f"(<= {x} {smt_num(rect.x_tr)})",
        f"(>= {y} {smt_num(rect.y_bl)})",
        f"(<= {y} {smt_num(rect.y_tr)})",
    )
    return f"(not {inside})"


def _in_workspace(x: str, y: str, ws: Workspace) -> str:
    return _and(
        f"(>= {x} {smt_num(ws[0])})",
        f"(<= {x} {smt_num(ws[2])})",
        f"(>= {y} {smt_num(ws[1])})",
        f"(<= {y} {smt_num(ws[3])})",
    )


def _line_value(a: str, b: str, c: str, px: str, py: str) -> str:
    return f"(+ (* {a} {px}) (* {b} {py}) {c})"


def _separation(a: str, b: str, c: str, p: Tuple[str, str], q: Tuple[str, str], rect: ObstacleRect) -> str:
    corners = [(smt_num(cx), smt_num(cy)) for cx, cy in rect.corners()]
    sides = []
    for way, obs in (("<", ">"), (">", "<")):
        lits = [f"({way} {_line_value(a, b, c, *pt)} 0.0)" for pt in (p, q)]
        lits += [f"({obs} {_line_value(a, b, c, *pt)} 0.0)" for pt in corners]
        sides.append(_and(*lits))
    return _or(*sides)


def encode_pwl(problem: PlanningProblem, decimal_precision: Optional[int] = 6) -> SmtScript:
    """Piecewise-linear waypoint encoding with separating-line obstacle clearance.

    Waypoints ``x_t, y_t`` (t = 0..M); for every segment t-1 -> t and obstacle j
    a line ``a_t_j x + b_t_j y + c_t_j = 0`` must put both endpoints strictly on
    one side and all four obstacle corners strictly on the other.
    """
    problem.validate()
    M, obstacles = problem.M, problem.obstacles
    em = _Emitter(decimal_precision)
    xs = [em.declare(f"x_{t}") for t in range(M + 1)]
    ys = [em.declare(f"y_{t}") for t in range(M + 1)]
    lines = {}
    for t in range(1, M + 1):
        for j in range(len(obstacles)):
            lines[t, j] = tuple(em.declare(f"{s}_{t}_{j}") for s in "abc")

    em.comment("init")
    em.assert_(_and(f"(= x_0 {smt_num(problem.init.x)})", f"(= y_0 {smt_num(problem.init.y)})"))

    em.comment("goal: reached at some t >= 1 and kept afterwards")
    gx, gy = smt_num(problem.goal.x), smt_num(problem.goal.y)
    at_goal = [_and(f"(= {xs[t]} {gx})", f"(= {ys[t]} {gy})") for t in range(M + 1)]
    em.assert_(_or(*at_goal[1:]))
    for t in range(1, M):
        em.assert_(f"(=> {at_goal[t]} {at_goal[t + 1]})")

    em.comment("workspace")
    for t in range(M + 1):
        em.assert_(_in_workspace(xs[t], ys[t], problem.workspace))

    if obstacles:
        em.comment("waypoints outside every inflated obstacle")
        for t in range(M + 1):
            for rect in obstacles:
                em.assert_(_outside(xs[t], ys[t], rect))
        em.comment("segment t-1 -> t separated from obstacle j by a line")
        for t in range(1, M + 1):
            for j, rect in enumerate(obstacles):
                em.assert_(_separation(*lines[t, j], (xs[t - 1], ys[t - 1]), (xs[t], ys[t]), rect))

    em.comment("bounded movement")
    v = smt_num(problem.v)
    for t in range(M):
        em.assert_(
            _and(
                f"(< (- {xs[t + 1]} {xs[t]}) {v})",
                f"(< (- {xs[t]} {xs[t + 1]}) {v})",
                f"(< (- {ys[t + 1]} {ys[t]}) {v})",
                f"(< (- {ys[t]} {ys[t + 1]}) {v})",
            )
        )
    return em.finish(EncodingKind.PWL, M, [n for pair in zip(xs, ys) for n in pair])


def _wrap_decimal(h: Decimal) -> Decimal:
    while h > 180:
        h -= 360
    while h <= -180:
        h += 360
    return h


def reachable_headings(theta0: float, rotations: Sequence[float], steps: int) -> List[Decimal]:
    """All headings reachable from ``theta0`` with at most ``steps`` rotations, exactly."""
    start = _wrap_decimal(Decimal(repr(float(theta0))))
    rots = [Decimal(repr(float(r))) for r in rotations]
    seen = {start}
    frontier = {start}
    for _ in range(steps):
        nxt = {_wrap_decimal(h + r) for h in frontier for r in rots} - seen
        if not nxt:
            break
        seen |= nxt
        frontier = nxt
    return sorted(seen)


def _trig_const(value: float) -> str:
    # 17 significant digits reproduce the double exactly
    return smt_num(Decimal(f"{value:.17g}"))


def encode_kinematic(
    problem: PlanningProblem,
    kp: KinematicParams = KinematicParams(),
    minimize_turns: bool = False,
    supports_omt: bool = True,
    decimal_precision: Optional[int] = 6,
) -> SmtScript:
    """Motion-primitive encoding: forward/backward steps along the heading, pure rotations, or stay.

    Headings are in degrees. Every heading the robot can take within M steps
    is enumerated up front; ``cs_t``/``sn_t`` are tied to the cosine and sine
    of ``th_t`` through that table, which keeps the script inside polynomial
    real arithmetic. With ``minimize_turns`` the script maximises the number
    of consecutive equal displacement vectors (OMT ``maximize``).
    """
    if minimize_turns and not supports_omt:
        raise ValueError("turn minimisation needs an OMT-capable solver (maximize)")
    problem.validate()
    M = problem.M
    headings = reachable_headings(problem.init.theta, kp.rotations, M)
    em = _Emitter(decimal_precision)
    xs = [em.declare(f"x_{t}") for t in range(M + 1)]
    ys = [em.declare(f"y_{t}") for t in range(M + 1)]
    ths = [em.declare(f"th_{t}") for t in range(M + 1)]
    cs = [em.declare(f"cs_{t}") for t in range(M)]
    sn = [em.declare(f"sn_{t}") for t in range(M)]
    ks = [em.declare(f"k_{t}") for t in range(M)]

    em.comment("init")
    em.assert_(
        _and(
            f"(= x_0 {smt_num(problem.init.x)})",
            f"(= y_0 {smt_num(problem.init.y)})",
            f"(= th_0 {smt_num(_wrap_decimal(Decimal(repr(problem.init.theta))))})",
        )
    )

    em.comment("heading domain and trigonometric table")
    for t in range(1, M + 1):
        em.assert_(_or(*(f"(= {ths[t]} {smt_num(h)})" for h in headings)))
    for t in range(M):
        rows = []
        for h in headings:
            rad = math.radians(float(h))
            rows.append(
                f"(=> (= {ths[t]} {smt_num(h)}) "
                f"(and (= {cs[t]} {_trig_const(math.cos(rad))}) (= {sn[t]} {_trig_const(math.sin(rad))})))"
            )
        em.assert_(_and(*rows))
        em.assert_(f"(or (= {ks[t]} (- 1.0)) (= {ks[t]} 0.0) (= {ks[t]} 1.0))")
        em.assert_(f"(and (> {ths[t + 1]} (- 180.0)) (<= {ths[t + 1]} 180.0))")

    em.comment("goal within tolerance, exact heading, then stay")
    gx, gy, eps = smt_num(problem.goal.x), smt_num(problem.goal.y), smt_num(kp.goal_tolerance)
    gth = smt_num(_wrap_decimal(Decimal(repr(problem.goal.theta))))
    at_goal = [
        _and(
            f"(<= (- {xs[t]} {gx}) {eps})",
            f"(<= (- {gx} {xs[t]}) {eps})",
            f"(<= (- {ys[t]} {gy}) {eps})",
            f"(<= (- {gy} {ys[t]}) {eps})",
            f"(= {ths[t]} {gth})",
        )
        for t in range(M + 1)
    ]
    em.assert_(_or(*at_goal[1:]))
    for t in range(1, M):
        em.assert_(
            f"(=> {at_goal[t]} "
            f"(and (= {xs[t + 1]} {xs[t]}) (= {ys[t + 1]} {ys[t]}) (= {ths[t + 1]} {ths[t]})))"
        )

    em.comment("workspace and obstacle exclusion")
    for t in range(M + 1):
        em.assert_(_in_workspace(xs[t], ys[t], problem.workspace))
        for rect in problem.obstacles:
            em.assert_(_outside(xs[t], ys[t], rect))

    em.comment("one motion primitive per step")
    vx, vy = smt_num(kp.v_x), smt_num(kp.v_y)
    for t in range(M):
        x0, x1, y0, y1, h0, h1 = xs[t], xs[t + 1], ys[t], ys[t + 1], ths[t], ths[t + 1]
        options = [
            f"(and (= {x1} (+ {x0} (* {vx} {cs[t]}))) (= {y1} (+ {y0} (* {vy} {sn[t]}))) (= {h1} {h0}))",
            f"(and (= {x1} (- {x0} (* {vx} {cs[t]}))) (= {y1} (- {y0} (* {vy} {sn[t]}))) (= {h1} {h0}))",
            f"(and (= {x1} {x0}) (= {y1} {y0}) (= {h1} {h0}))",
        ]
        for rho in kp.rotations:
            options.append(
                f"(and (= {x1} {x0}) (= {y1} {y0}) "
                f"(= {h1} (+ {h0} {smt_num(rho)} (* (- 360.0) {ks[t]}))))"
            )
        em.assert_(_or(*options))

    extra = []
    kind = EncodingKind.KINEMATIC
    indicators = []
    if minimize_turns:
        kind = EncodingKind.KINEMATIC_OPTIMIZED
        for t in range(M - 1):
            m = em.declare(f"m_{t}")
            indicators.append(m)
            same = _and(
                f"(= (- {xs[t]} {xs[t + 1]}) (- {xs[t + 1]} {xs[t + 2]}))",
                f"(= (- {ys[t]} {ys[t + 1]}) (- {ys[t + 1]} {ys[t + 2]}))",
            )
            em.assert_(f"(= {m} (ite {same} 1.0 0.0))")
        if indicators:
            total = indicators[0] if len(indicators) == 1 else f"(+ {' '.join(indicators)})"
            extra.append(f"(maximize {total})")
    values = [n for triple in zip(xs, ys, ths) for n in triple] + indicators
    return em.finish(kind, M, values, extra=extra, headings=headings)


def encode(problem: PlanningProblem, kind: EncodingKind, kp: KinematicParams = KinematicParams(), **kw) -> SmtScript:
    kind = EncodingKind(kind)
    if kind is EncodingKind.PWL:
        return encode_pwl(problem, **kw)
    return encode_kinematic(problem, kp, minimize_turns=kind is EncodingKind.KINEMATIC_OPTIMIZED, **kw)
