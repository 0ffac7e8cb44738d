"""Run an external SMT-LIB solver on emitted scripts and turn models into motion plans."""

from __future__ import annotations

import enum
import logging
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .encode import EncodingKind, KinematicParams, PlanningProblem, SmtScript, encode
from .plan import MotionPlan, NoPlan, Planner, ValidationReport, validate_plan  # noqa: F401

logger = logging.getLogger(__name__)

SOLVER_ENV_VAR = "SMTNAV_SOLVER"
DEFAULT_SOLVER_COMMAND = ("z3", "-in", "-smt2")


class SolverStatus(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"
    ERROR = "error"


@dataclass(frozen=True)
class SolverConfig:
    """Solver command line and per-call deadline.

    A command containing ``-in`` gets the script on stdin; otherwise the path of
    a temporary script file is appended as the last argument.
    """

    command: Tuple[str, ...] = DEFAULT_SOLVER_COMMAND
    timeout: float = 60.0
    supports_omt: bool = True

    def __post_init__(self):
        cmd = self.command
        if isinstance(cmd, str):
            cmd = shlex.split(cmd)
        object.__setattr__(self, "command", tuple(cmd))
        if not self.command:
            raise ValueError("empty solver command")

    @classmethod
    def from_env(cls, timeout: float = 60.0, command=None) -> "SolverConfig":
        """Command from ``command``, else ``$SMTNAV_SOLVER``, else ``z3 -in -smt2``."""
        cmd = command or os.environ.get(SOLVER_ENV_VAR) or DEFAULT_SOLVER_COMMAND
        return cls(command=cmd, timeout=timeout)


@dataclass(frozen=True)
class SolverResult:
    status: SolverStatus
    model: Optional[Dict[str, Fraction]] = None
    wall_time: float = 0.0
    raw_output: str = field(default="", repr=False)

    def __post_init__(self):
        if (self.model is not None) != (self.status is SolverStatus.SAT):
            raise ValueError("a model is present exactly when the status is sat")


class ModelParseError(ValueError):
    pass


def _tokenize(text: str) -> List[str]:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
        elif ch == '"':
            j = text.index('"', i + 1)
            out.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _read_sexprs(tokens: List[str]):
    stack: List[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ModelParseError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ModelParseError("unbalanced '('")
    return stack[0]


def _value(expr) -> Fraction:
    """Evaluate an SMT-LIB numeral: integer, decimal (z3's trailing '?' allowed), / or unary -."""
    if isinstance(expr, str):
        tok = expr.rstrip("?")
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelParseError(f"not a number: {expr!r}") from exc
    if not expr:
        raise ModelParseError("empty expression")
    head, args = expr[0], expr[1:]
    if head == "-" and len(args) == 1:
        return -_value(args[0])
    if head == "-" and len(args) > 1:
        return _value(args[0]) - sum(_value(a) for a in args[1:])
    if head == "/" and len(args) == 2:
        return _value(args[0]) / _value(args[1])
    if head == "+":
        return sum((_value(a) for a in args), Fraction(0))
    if head == "*":
        out = Fraction(1)
        for a in args:
            out *= _value(a)
        return out
    if head == "to_real" and len(args) == 1:
        return _value(args[0])
    raise ModelParseError(f"unsupported value form {expr!r}")


def parse_model(text: str) -> Dict[str, Fraction]:
    """Parse ``get-value`` output such as ``((x_1 (/ 13 2)) (y_1 (- 0.5)))``."""
    model: Dict[str, Fraction] = {}
    for block in _read_sexprs(_tokenize(text)):
        if not isinstance(block, list):
            raise ModelParseError(f"unexpected token {block!r} in model output")
        for pair in block:
            if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
                raise ModelParseError(f"malformed binding {pair!r}")
            model[pair[0]] = _value(pair[1])
    return model


def parse_output(stdout: str) -> Tuple[SolverStatus, Optional[Dict[str, Fraction]]]:
    lines = stdout.strip().splitlines()
    if not lines:
        raise ModelParseError("empty solver output")
    first = lines[0].strip()
    try:
        status = SolverStatus(first)
    except ValueError:
        raise ModelParseError(f"unexpected first line {first!r}") from None
    if status in (SolverStatus.TIMEOUT, SolverStatus.ERROR):
        raise ModelParseError(f"unexpected first line {first!r}")
    if status is not SolverStatus.SAT:
        return status, None
    rest = "\n".join(lines[1:])
    if "(error" in rest:
        raise ModelParseError("solver reported an error after sat")
    return status, parse_model(rest)


def run_solver(script: Union[SmtScript, str], config: SolverConfig = SolverConfig()) -> SolverResult:
    """Solve ``script`` in a child process and parse its verdict and model."""
    text = script.text if isinstance(script, SmtScript) else script
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(text)
        path = fh.name
    use_stdin = "-in" in config.command
    cmd = list(config.command) if use_stdin else [*config.command, path]
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            cmd,
            input=text if use_stdin else None,
            capture_output=True,
            text=True,
            timeout=config.timeout,
        )
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        return SolverResult(SolverStatus.TIMEOUT, None, time.perf_counter() - start, out)
    except OSError as exc:
        return SolverResult(SolverStatus.ERROR, None, time.perf_counter() - start, str(exc))
    finally:
        os.unlink(path)
    elapsed = time.perf_counter() - start
    raw = proc.stdout + (("\n" + proc.stderr) if proc.stderr else "")
    try:
        status, model = parse_output(proc.stdout)
    except ModelParseError as exc:
        logger.debug("unparseable solver output: %s", exc)
        return SolverResult(SolverStatus.ERROR, None, elapsed, raw)
    return SolverResult(status, model, elapsed, raw)


def decode_plan(
    result: SolverResult,
    M: int,
    kinematic: bool = False,
    planner: Optional[Planner] = None,
    stats=None,
    encode_time: float = 0.0,
) -> MotionPlan:
    """Waypoints x_t, y_t (and th_t) for t = 0..M, with the trailing goal repeats collapsed."""
    if result.status is not SolverStatus.SAT:
        raise ValueError(f"cannot decode a {result.status.value} result")
    names = ("x", "y", "th") if kinematic else ("x", "y")
    wps = []
    for t in range(M + 1):
        try:
            wps.append(tuple(float(result.model[f"{n}_{t}"]) for n in names))
        except KeyError as exc:
            raise ValueError(f"model lacks variable {exc.args[0]}") from None
    while len(wps) > 1 and wps[-1] == wps[-2]:
        wps.pop()
    if planner is None:
        planner = Planner.SMT_KINEMATIC if kinematic else Planner.SMT
    return MotionPlan(tuple(wps), planner, stats, result.wall_time, encode_time)


_PLANNER_FOR_KIND = {
    EncodingKind.PWL: Planner.SMT,
    EncodingKind.KINEMATIC: Planner.SMT_KINEMATIC,
    EncodingKind.KINEMATIC_OPTIMIZED: Planner.SMT_KINEMATIC_OPT,
}


class SolverFailure(RuntimeError):
    """The solver could not be run or its output could not be understood."""

    def __init__(self, message: str, result: SolverResult):
        super().__init__(message)
        self.result = result


def plan_with_deepening(
    problem: PlanningProblem,
    m_min: int,
    m_max: int,
    kind: EncodingKind = EncodingKind.PWL,
    config: SolverConfig = SolverConfig(),
    kp: KinematicParams = KinematicParams(),
) -> Union[MotionPlan, NoPlan]:
    """Try M = m_min, m_min + 1, ... and return the first satisfiable plan.

    Unknown and timeout count as "no plan at this M"; solver errors raise
    ``SolverFailure``.
    """
    if not (1 <= m_min <= m_max):
        raise ValueError(f"need 1 <= m_min <= m_max, got {m_min}, {m_max}")
    kind = EncodingKind(kind)
    attempts = []
    total_time = 0.0
    for M in range(m_min, m_max + 1):
        sub = problem.with_budget(M)
        t0 = time.perf_counter()
        kw = {} if kind is EncodingKind.PWL else {"supports_omt": config.supports_omt}
        script = encode(sub, kind, kp, **kw)
        enc_time = time.perf_counter() - t0
        result = run_solver(script, config)
        total_time += result.wall_time
        logger.info("M=%d %s %.3fs", M, result.status.value, result.wall_time)
        if result.status is SolverStatus.ERROR:
            raise SolverFailure(f"solver failed at M={M}: {result.raw_output.strip()[:200]}", result)
        attempts.append((M, result.status.value))
        if result.status is SolverStatus.SAT:
            plan = decode_plan(
                result,
                M,
                kinematic=kind is not EncodingKind.PWL,
                planner=_PLANNER_FOR_KIND[kind],
                stats=script.stats,
                encode_time=enc_time,
            )
            # report the whole deepening schedule, not just the final call
            return replace(plan, solve_time=total_time)
    return NoPlan("no satisfiable budget in range", tuple(attempts), solve_time=total_time)
