"""Planar predicates shared by the planners, the plan validator and the controller.

Intersection and separation tests run on exact rationals (floats convert to
``Fraction`` without loss), so the intersection test and the separating-line
construction can never disagree on a boundary case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

Point = Tuple[float, float]


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees into (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


@dataclass(frozen=True)
class ObstacleRect:
    """Axis-aligned closed rectangle in world coordinates."""

    x_bl: float
    y_bl: float
    x_tr: float
    y_tr: float

    def __post_init__(self):
        if not (self.x_bl < self.x_tr and self.y_bl < self.y_tr):
            raise ValueError(
                f"degenerate rectangle ({self.x_bl}, {self.y_bl})-({self.x_tr}, {self.y_tr})"
            )

    @property
    def width(self) -> float:
        return self.x_tr - self.x_bl

    @property
    def height(self) -> float:
        return self.y_tr - self.y_bl

    def corners(self) -> Tuple[Point, Point, Point, Point]:
        """Corners in (bl, br, tl, tr) order."""
        return (
            (self.x_bl, self.y_bl),
            (self.x_tr, self.y_bl),
            (self.x_bl, self.y_tr),
            (self.x_tr, self.y_tr),
        )

    def to_dict(self) -> dict:
        return {"x_bl": self.x_bl, "y_bl": self.y_bl, "x_tr": self.x_tr, "y_tr": self.y_tr}

    @classmethod
    def from_dict(cls, d: dict) -> "ObstacleRect":
        return cls(float(d["x_bl"]), float(d["y_bl"]), float(d["x_tr"]), float(d["y_tr"]))


@dataclass(frozen=True)
class Pose:
    """Planar pose; ``theta`` in degrees from +X, kept in (-180, 180]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not (-180.0 < self.theta <= 180.0):
            raise ValueError(f"theta {self.theta} outside (-180, 180]; use wrap_degrees")

    @property
    def position(self) -> Point:
        return (self.x, self.y)

    def as_list(self) -> list:
        return [self.x, self.y, self.theta]


@dataclass(frozen=True)
class SeparatingLine:
    """The line ``a*x + b*y + c = 0``; coefficients are exact rationals."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("(a, b) must not both be zero")

    def side(self, p: Point) -> Fraction:
        """Signed value of the line equation at ``p`` (exact)."""
        return self.a * Fraction(p[0]) + self.b * Fraction(p[1]) + self.c

    def separates(self, points: Iterable[Point], others: Iterable[Point]) -> bool:
        """True when ``points`` and ``others`` lie strictly on opposite sides."""
        s1 = [self.side(p) for p in points]
        s2 = [self.side(p) for p in others]
        return (all(v < 0 for v in s1) and all(v > 0 for v in s2)) or (
            all(v > 0 for v in s1) and all(v < 0 for v in s2)
        )


def point_in_rect(p: Point, rect: ObstacleRect) -> bool:
    """Closed containment: points on the boundary count as inside."""
    return rect.x_bl <= p[0] <= rect.x_tr and rect.y_bl <= p[1] <= rect.y_tr


def segment_intersects_rect(p: Point, q: Point, rect: ObstacleRect) -> bool:
    """Does the closed segment pq touch the closed rectangle?

    Liang-Barsky slab clipping of the parameter interval [0, 1], carried out in
    exact arithmetic. A zero-length segment reduces to ``point_in_rect``.
    """
    if point_in_rect(p, rect) or point_in_rect(q, rect):
        return True
    px, py = Fraction(p[0]), Fraction(p[1])
    dx, dy = Fraction(q[0]) - px, Fraction(q[1]) - py
    t0, t1 = Fraction(0), Fraction(1)
    for start, delta, lo, hi in (
        (px, dx, Fraction(rect.x_bl), Fraction(rect.x_tr)),
        (py, dy, Fraction(rect.y_bl), Fraction(rect.y_tr)),
    ):
        if delta == 0:
            if start < lo or start > hi:
                return False
            continue
        ta, tb = (lo - start) / delta, (hi - start) / delta
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1:
            return False
    return True


def _axis_candidates(p: Point, q: Point, rect: ObstacleRect):
    xs = (Fraction(p[0]), Fraction(q[0]))
    ys = (Fraction(p[1]), Fraction(q[1]))
    x_bl, x_tr = Fraction(rect.x_bl), Fraction(rect.x_tr)
    y_bl, y_tr = Fraction(rect.y_bl), Fraction(rect.y_tr)
    # each candidate is x = k or y = k, strictly inside the gap
    if max(xs) < x_bl:
        yield SeparatingLine(Fraction(1), Fraction(0), -(max(xs) + x_bl) / 2)
    if min(xs) > x_tr:
        yield SeparatingLine(Fraction(1), Fraction(0), -(min(xs) + x_tr) / 2)
    if max(ys) < y_bl:
        yield SeparatingLine(Fraction(0), Fraction(1), -(max(ys) + y_bl) / 2)
    if min(ys) > y_tr:
        yield SeparatingLine(Fraction(0), Fraction(1), -(min(ys) + y_tr) / 2)


def find_separating_line(p: Point, q: Point, rect: ObstacleRect) -> Optional[SeparatingLine]:
    """Line with p, q strictly on one side and all rect corners strictly on the other.

    Candidate normals are the rectangle's edge normals and the segment's own
    normal; for a segment against a convex polygon these are the only axes that
    can separate, so ``None`` is returned exactly when the closed sets meet.
    """
    corners = rect.corners()
    for line in _axis_candidates(p, q, rect):
        return line
    px, py = Fraction(p[0]), Fraction(p[1])
    dx, dy = Fraction(q[0]) - px, Fraction(q[1]) - py
    if dx == 0 and dy == 0:
        return None
    a, b = -dy, dx
    c = -(a * px + b * py)
    vals = [a * Fraction(cx) + b * Fraction(cy) + c for cx, cy in corners]
    if all(v > 0 for v in vals):
        return SeparatingLine(a, b, c - min(vals) / 2)
    if all(v < 0 for v in vals):
        return SeparatingLine(a, b, c - max(vals) / 2)
    return None


def effective_angle(pose: Pose, goal: Point) -> float:
    """Heading change in degrees, wrapped to (-180, 180], that points ``pose`` at ``goal``."""
    dx, dy = goal[0] - pose.x, goal[1] - pose.y
    if dx == 0 and dy == 0:
        raise ValueError("goal coincides with the current position; angle undefined")
    phi = math.degrees(math.atan2(dy, dx))
    return wrap_degrees(phi - pose.theta)


def path_length(points: Sequence[Sequence[float]]) -> float:
    return sum(math.dist(a[:2], b[:2]) for a, b in zip(points, points[1:]))
