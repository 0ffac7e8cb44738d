import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import LineString, Point as ShPoint, box

from smtnav.geometry import (
    ObstacleRect,
    Pose,
    SeparatingLine,
    effective_angle,
    find_separating_line,
    point_in_rect,
    segment_intersects_rect,
    wrap_degrees,
)

SQUARE = ObstacleRect(2, 2, 4, 4)

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def rects(draw):
    x0, x1 = sorted(draw(st.lists(coord, min_size=2, max_size=2, unique=True)))
    y0, y1 = sorted(draw(st.lists(coord, min_size=2, max_size=2, unique=True)))
    return ObstacleRect(x0, y0, x1, y1)


def test_rect_rejects_degenerate():
    with pytest.raises(ValueError):
        ObstacleRect(1, 1, 1, 2)


@pytest.mark.parametrize(
    "p, expected", [((3, 3), True), ((2, 2), True), ((4.001, 3), False)]
)
def test_point_in_rect(p, expected):
    assert point_in_rect(p, SQUARE) is expected


@pytest.mark.parametrize(
    "p, q, expected",
    [((0, 3), (6, 3), True), ((0, 0), (1, 1), False), ((0, 0), (5, 5), True)],
)
def test_segment_intersects_rect_examples(p, q, expected):
    assert segment_intersects_rect(p, q, SQUARE) is expected


def test_segment_touching_corner_counts():
    assert segment_intersects_rect((0, 8), (8, 0), SQUARE)  # passes through (4, 4)
    assert not segment_intersects_rect((0, 8.001), (8.001, 0), SQUARE)


def _separates_all(line, p, q, rect):
    return line.separates([p, q], rect.corners())


def test_separating_line_examples():
    line = find_separating_line((0, 0), (0, 1), SQUARE)
    assert line is not None and _separates_all(line, (0, 0), (0, 1), SQUARE)
    assert find_separating_line((0, 3), (6, 3), SQUARE) is None
    unit = ObstacleRect(0, 0, 1, 1)
    line = find_separating_line((0, 5), (5, 0), unit)
    assert line is not None and _separates_all(line, (0, 5), (5, 0), unit)


def test_separating_line_rejects_zero_normal():
    with pytest.raises(ValueError):
        SeparatingLine(0, 0, 1)


@settings(max_examples=300, deadline=None)
@given(coord, coord, coord, coord, rects())
def test_intersection_matches_shapely(px, py, qx, qy, rect):
    seg = LineString([(px, py), (qx, qy)]) if (px, py) != (qx, qy) else ShPoint(px, py)
    expected = seg.intersects(box(rect.x_bl, rect.y_bl, rect.x_tr, rect.y_tr))
    assert segment_intersects_rect((px, py), (qx, qy), rect) == expected


@settings(max_examples=300, deadline=None)
@given(coord, coord, coord, coord, rects())
def test_intersection_is_symmetric(px, py, qx, qy, rect):
    p, q = (px, py), (qx, qy)
    assert segment_intersects_rect(p, q, rect) == segment_intersects_rect(q, p, rect)


@settings(max_examples=200, deadline=None)
@given(coord, coord, rects())
def test_zero_length_segment_is_point_test(px, py, rect):
    p = (px, py)
    assert segment_intersects_rect(p, p, rect) == point_in_rect(p, rect)


def test_separation_oracle_agreement_seeded():
    rng = random.Random(7)
    for _ in range(2000):
        x0, x1 = sorted(rng.uniform(-5, 5) for _ in range(2))
        y0, y1 = sorted(rng.uniform(-5, 5) for _ in range(2))
        rect = ObstacleRect(x0, y0, x1, y1)
        p = (rng.uniform(-6, 6), rng.uniform(-6, 6))
        q = (rng.uniform(-6, 6), rng.uniform(-6, 6))
        line = find_separating_line(p, q, rect)
        assert (line is None) == segment_intersects_rect(p, q, rect)
        if line is not None:
            assert _separates_all(line, p, q, rect)


@pytest.mark.parametrize(
    "pose, goal, expected",
    [
        (Pose(0, 0, 0), (1, 1), 45.0),
        (Pose(0, 0, 90), (0, 5), 0.0),
        (Pose(0, 0, 170), (1, -1), 145.0),
    ],
)
def test_effective_angle(pose, goal, expected):
    assert effective_angle(pose, goal) == pytest.approx(expected, abs=1e-12)


def test_effective_angle_undefined_at_goal():
    with pytest.raises(ValueError):
        effective_angle(Pose(1, 2, 0), (1, 2))


@given(
    st.floats(-100, 100), st.floats(-100, 100), st.floats(-179.999, 180),
    st.floats(-100, 100), st.floats(-100, 100),
)
def test_effective_angle_range(x, y, th, gx, gy):
    if (x, y) == (gx, gy):
        return
    a = effective_angle(Pose(x, y, th), (gx, gy))
    assert -180 < a <= 180


@pytest.mark.parametrize("a, expected", [(190, -170), (-180, 180), (540, 180), (-190, 170), (0, 0)])
def test_wrap_degrees(a, expected):
    assert math.isclose(wrap_degrees(a), expected)


def test_pose_rejects_unwrapped_heading():
    with pytest.raises(ValueError):
        Pose(0, 0, -180)
