"""Line-of-sight waypoint following over discretised legged motion primitives."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Point, Pose, effective_angle, wrap_degrees

ROTATION_STEPS = (6.0, 4.5, 3.0, 1.5)


@dataclass(frozen=True)
class CalibrationRow:
    theta1: float
    theta2: float
    gamma: float
    alpha: float
    gain: float

    def __post_init__(self):
        if not math.isclose(self.gamma, abs(self.theta1) - abs(self.theta2), abs_tol=1e-9):
            raise ValueError(f"gamma {self.gamma} != |theta1| - |theta2|")
        if not math.isclose(self.gamma, self.gain * self.alpha, rel_tol=1e-3):
            raise ValueError(f"gamma {self.gamma} != K * alpha = {self.gain * self.alpha}")


@dataclass(frozen=True)
class RotationCalibration:
    """Joint-angle pairs and the net rotation they produce (gamma = K * alpha)."""

    rows: Tuple[CalibrationRow, ...]

    def effective(self, nominal: float) -> float:
        """Measured rotation for a nominal discretisation step (sign preserved)."""
        mag = abs(nominal)
        # nominal steps are the measured values rounded to the 1.5 degree grid
        row = min(self.rows, key=lambda r: abs(r.alpha - mag))
        if abs(row.alpha - mag) > 0.75:
            raise ValueError(f"no calibration row for a {nominal} degree rotation")
        return math.copysign(row.alpha, nominal)


MEASURED_CALIBRATION = RotationCalibration(
    (
        CalibrationRow(45.0, 20.0, 25.0, 5.947, 4.204),
        CalibrationRow(40.0, 20.0, 20.0, 4.535, 4.414),
        CalibrationRow(35.0, 20.0, 15.0, 3.072, 4.883),
        CalibrationRow(30.0, 20.0, 10.0, 1.485, 6.734),
    )
)


class PrimitiveKind(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    ROT_CLK = "rot_clk"
    ROT_ACLK = "rot_aclk"


@dataclass(frozen=True)
class MotionPrimitive:
    kind: PrimitiveKind
    angle: float = 0.0
    compensation: bool = False  # a Backward issued after a rotation

    def __post_init__(self):
        object.__setattr__(self, "kind", PrimitiveKind(self.kind))
        rotation = self.kind in (PrimitiveKind.ROT_CLK, PrimitiveKind.ROT_ACLK)
        if rotation and self.angle not in ROTATION_STEPS:
            raise ValueError(f"rotation step {self.angle} not in {ROTATION_STEPS}")
        if not rotation and self.angle:
            raise ValueError("linear primitives carry no angle")

    @property
    def label(self) -> str:
        if self.kind is PrimitiveKind.ROT_CLK:
            return f"RotClk_{self.angle:g}"
        if self.kind is PrimitiveKind.ROT_ACLK:
            return f"RotAclk_{self.angle:g}"
        return "Move-forward" if self.kind is PrimitiveKind.FORWARD else "Move-backward"


FORWARD = MotionPrimitive(PrimitiveKind.FORWARD)
BACKWARD = MotionPrimitive(PrimitiveKind.BACKWARD)
COMPENSATE = MotionPrimitive(PrimitiveKind.BACKWARD, compensation=True)


@dataclass(frozen=True)
class ControllerParams:
    step_length: float = 6.46
    angle_deadband: float = 1.5
    backstep_distance: float = 0.0
    calibrated: bool = False
    calibration: RotationCalibration = MEASURED_CALIBRATION

    def __post_init__(self):
        if self.step_length <= 0:
            raise ValueError("step_length must be positive")
        if self.angle_deadband != min(ROTATION_STEPS):
            raise ValueError("angle_deadband must equal the smallest rotation step")


@dataclass
class NoiseModel:
    """Gaussian per-primitive perturbation; the generator is owned by the caller."""

    sigma_pos: float
    sigma_ang: float
    rng: np.random.Generator

    @classmethod
    def seeded(cls, sigma_pos: float, sigma_ang: float, seed: int) -> "NoiseModel":
        return cls(sigma_pos, sigma_ang, np.random.default_rng(seed))


def apply_primitive(
    pose: Pose, p: MotionPrimitive, params: ControllerParams = ControllerParams(), noise: Optional[NoiseModel] = None
) -> Pose:
    """Net pose change of one primitive. Clockwise rotation decreases theta."""
    x, y, th = pose.x, pose.y, pose.theta
    if p.kind in (PrimitiveKind.FORWARD, PrimitiveKind.BACKWARD):
        dist = params.step_length
        if p.kind is PrimitiveKind.BACKWARD:
            dist = -(params.backstep_distance if p.compensation else params.step_length)
        rad = math.radians(th)
        x += dist * math.cos(rad)
        y += dist * math.sin(rad)
    else:
        rho = params.calibration.effective(p.angle) if params.calibrated else p.angle
        th += rho if p.kind is PrimitiveKind.ROT_ACLK else -rho
    if noise is not None:
        x += noise.rng.normal(0.0, noise.sigma_pos)
        y += noise.rng.normal(0.0, noise.sigma_pos)
        th += noise.rng.normal(0.0, noise.sigma_ang)
    return Pose(x, y, wrap_degrees(th))


def rotation_schedule(theta: float) -> List[MotionPrimitive]:
    """Greedy 6 / 4.5 / 3 / 1.5 degree cascade; each rotation is followed by a compensating step back.

    Positive ``theta`` turns anticlockwise. A residual below 1.5 degrees is left alone.
    """
    out = []
    while abs(theta) >= ROTATION_STEPS[-1]:
        step = next(s for s in ROTATION_STEPS if abs(theta) >= s)
        if theta > 0:
            out.append(MotionPrimitive(PrimitiveKind.ROT_ACLK, step))
            theta -= step
        else:
            out.append(MotionPrimitive(PrimitiveKind.ROT_CLK, step))
            theta += step
        out.append(COMPENSATE)
    return out


def schedule_rotation(primitives: Sequence[MotionPrimitive]) -> float:
    """Signed nominal rotation (degrees) covered by a primitive list."""
    total = 0.0
    for p in primitives:
        if p.kind is PrimitiveKind.ROT_ACLK:
            total += p.angle
        elif p.kind is PrimitiveKind.ROT_CLK:
            total -= p.angle
    return total


@dataclass(frozen=True)
class PrimitiveTrace:
    """Primitives executed from ``start`` with the pose after each one.

    Noise-free traces are replayed on construction and rejected if any pose
    does not follow from its predecessor.
    """

    start: Pose
    steps: Tuple[Tuple[MotionPrimitive, Pose], ...]
    params: ControllerParams = field(default=ControllerParams(), repr=False)
    noisy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.noisy:
            return
        pose = self.start
        for prim, after in self.steps:
            pose = apply_primitive(pose, prim, self.params)
            if pose != after:
                raise ValueError(f"trace step {prim.label} does not replay: {pose} vs {after}")

    @property
    def final(self) -> Pose:
        return self.steps[-1][1] if self.steps else self.start

    @property
    def primitives(self) -> List[MotionPrimitive]:
        return [p for p, _ in self.steps]


def _run(pose: Pose, prims: Sequence[MotionPrimitive], params: ControllerParams, noise) -> List[Tuple[MotionPrimitive, Pose]]:
    steps = []
    for prim in prims:
        pose = apply_primitive(pose, prim, params, noise)
        steps.append((prim, pose))
    return steps


def los_navigate(
    pose: Pose, waypoint: Point, params: ControllerParams = ControllerParams(), noise: Optional[NoiseModel] = None
) -> PrimitiveTrace:
    """Turn towards ``waypoint`` with the rotation cascade, then walk round(dist / L) steps."""
    theta = effective_angle(pose, waypoint)
    steps = _run(pose, rotation_schedule(theta), params, noise)
    here = steps[-1][1] if steps else pose
    dist = math.hypot(waypoint[0] - here.x, waypoint[1] - here.y)
    n_steps = math.floor(dist / params.step_length + 0.5)
    steps += _run(here, [FORWARD] * n_steps, params, noise)
    return PrimitiveTrace(pose, tuple(steps), params, noisy=noise is not None)


@dataclass(frozen=True)
class Trajectory:
    start: Pose
    legs: Tuple[PrimitiveTrace, ...]
    arrival_errors: Tuple[float, ...]

    @property
    def final(self) -> Pose:
        return self.legs[-1].final if self.legs else self.start

    @property
    def steps(self) -> List[Tuple[MotionPrimitive, Pose]]:
        return [s for leg in self.legs for s in leg.steps]

    def to_dict(self) -> dict:
        return {
            "start": self.start.as_list(),
            "steps": [{"primitive": p.label, "pose": after.as_list()} for p, after in self.steps],
            "arrival_errors": list(self.arrival_errors),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def errors_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["waypoint", "arrival_error"])
        for i, e in enumerate(self.arrival_errors):
            w.writerow([i, repr(e)])
        return buf.getvalue()


def execute_plan(
    waypoints: Sequence[Sequence[float]],
    init: Pose,
    params: ControllerParams = ControllerParams(),
    noise: Optional[NoiseModel] = None,
) -> Trajectory:
    """Chain ``los_navigate`` over the waypoints, recording the arrival error at each.

    Waypoints that coincide with the current position are skipped (error 0).
    Accepts a ``MotionPlan`` or a plain list of points.
    """
    if hasattr(waypoints, "waypoints"):
        waypoints = waypoints.waypoints
    pose = init
    legs, errors = [], []
    for w in waypoints:
        target = (float(w[0]), float(w[1]))
        if (pose.x, pose.y) == target:
            errors.append(0.0)
            continue
        leg = los_navigate(pose, target, params, noise)
        pose = leg.final
        legs.append(leg)
        errors.append(math.hypot(pose.x - target[0], pose.y - target[1]))
    return Trajectory(init, tuple(legs), tuple(errors))
