"""SVG 1.1 rendering of maps, obstacles and motion plans."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple
from xml.sax.saxutils import quoteattr

import numpy as np

from .geometry import ObstacleRect, Pose
from .gridmap import CellState, OccupancyGrid
from .plan import MotionPlan, Planner

PLANNER_COLORS = {
    Planner.SMT: "#1f4fd6",
    Planner.ASTAR: "#d62728",
    Planner.BFS: "#ff9900",
    Planner.SMT_KINEMATIC: "#8c2dbd",
    Planner.SMT_KINEMATIC_OPT: "#138a8a",
}


def _n(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") or "0"


def render_svg(
    grid: Optional[OccupancyGrid],
    obstacles: Sequence[ObstacleRect],
    plans: Sequence[MotionPlan],
    init: Pose,
    goal: Pose,
    workspace: Optional[Tuple[float, float, float, float]] = None,
    scale: float = 1.0,
) -> str:
    """Draw free space white, unknown cells grey, obstacles black, one polyline per plan.

    ``scale`` converts grid (map) coordinates to the world units used by the
    obstacles and plans.
    """
    if workspace is None:
        if grid is None:
            raise ValueError("need a grid or an explicit workspace")
        workspace = tuple(v * scale for v in grid.extent)
    x0, y0, x1, y1 = workspace
    if grid is not None:
        gx0, gy0, gx1, gy1 = (v * scale for v in grid.extent)
        x0, y0, x1, y1 = min(x0, gx0), min(y0, gy0), max(x1, gx1), max(y1, gy1)
    w, h = x1 - x0, y1 - y0
    stroke = max(w, h) / 250.0
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="800" height="{_n(800 * h / w)}" viewBox="{_n(x0)} {_n(-y1)} {_n(w)} {_n(h)}">',
        # world y points up; flip once for everything below
        '<g transform="scale(1,-1)">',
        f'<rect x="{_n(x0)}" y="{_n(y0)}" width="{_n(w)}" height="{_n(h)}" fill="white"/>',
    ]
    if grid is not None:
        res = grid.resolution * scale
        ox, oy = grid.origin[0] * scale, grid.origin[1] * scale
        out.append('<g fill="#808080" stroke="none">')
        unknown = grid.cells == CellState.UNKNOWN
        for row in range(grid.height):
            line = unknown[row]
            if not line.any():
                continue
            # run-length encode each raster row
            edges = np.flatnonzero(np.diff(np.concatenate(([0], line.view(np.int8), [0]))))
            for start, stop in zip(edges[::2], edges[1::2]):
                out.append(
                    f'<rect x="{_n(ox + start * res)}" y="{_n(oy + row * res)}" '
                    f'width="{_n((stop - start) * res)}" height="{_n(res)}"/>'
                )
        out.append("</g>")
    out.append('<g fill="black" stroke="none">')
    for o in obstacles:
        out.append(f'<rect x="{_n(o.x_bl)}" y="{_n(o.y_bl)}" width="{_n(o.width)}" height="{_n(o.height)}"/>')
    out.append("</g>")
    for plan in plans:
        color = PLANNER_COLORS.get(plan.planner, "#000000")
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in plan.points)
        out.append(
            f'<polyline class={quoteattr(plan.planner.value)} points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="{_n(stroke)}"/>'
        )
    box = stroke * 6
    out.append(
        f'<rect x="{_n(goal.x - box / 2)}" y="{_n(goal.y - box / 2)}" width="{_n(box)}" height="{_n(box)}" '
        'fill="none" stroke="#2ca02c" stroke-width="{0}"/>'.format(_n(stroke))
    )
    out.append(f'<circle cx="{_n(init.x)}" cy="{_n(init.y)}" r="{_n(box / 2)}" fill="#2ca02c"/>')
    out.append("</g>")
    out.append(
        f'<text x="{_n(init.x + box)}" y="{_n(-init.y)}" font-size="{_n(box * 2)}" fill="black">Start</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
