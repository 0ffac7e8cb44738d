"""Uniform cell decomposition of the workspace and the BFS / A* baseline planners."""

from __future__ import annotations

import heapq
import math
import time
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .geometry import ObstacleRect, Point
from .plan import GraphStats, MotionPlan, NoPlan, Planner

Workspace = Tuple[float, float, float, float]
SQRT2 = math.sqrt(2.0)

# (dcol, drow) for the 8 neighbours; orthogonal moves first
_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True, eq=False)
class CellGraph:
    """8-connected grid graph; node index = row * cols + col."""

    cols: int
    rows: int
    cell_size: float
    origin: Tuple[float, float]
    blocked: np.ndarray

    def __post_init__(self):
        blocked = np.asarray(self.blocked, dtype=bool).reshape(-1).copy()
        if blocked.size != self.cols * self.rows:
            raise ValueError("blocked mask size must equal cols * rows")
        blocked.setflags(write=False)
        object.__setattr__(self, "blocked", blocked)

    @property
    def num_nodes(self) -> int:
        return self.cols * self.rows

    @property
    def num_edges(self) -> int:
        """Undirected edge count (diagonals only where both side cells are free)."""
        free = ~self.blocked.reshape(self.rows, self.cols)
        horiz = np.count_nonzero(free[:, 1:] & free[:, :-1])
        vert = np.count_nonzero(free[1:, :] & free[:-1, :])
        square = free[1:, 1:] & free[:-1, :-1] & free[1:, :-1] & free[:-1, 1:]
        # a fully free 2x2 block carries both of its diagonals
        return int(horiz + vert + 2 * np.count_nonzero(square))

    def index(self, col: int, row: int) -> int:
        return row * self.cols + col

    def cell(self, index: int) -> Tuple[int, int]:
        return index % self.cols, index // self.cols

    def center(self, index: int) -> Point:
        col, row = self.cell(index)
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )

    def locate(self, p: Point) -> int:
        """Index of the cell containing ``p``; points on the far boundary map inward."""
        col = math.floor((p[0] - self.origin[0]) / self.cell_size)
        row = math.floor((p[1] - self.origin[1]) / self.cell_size)
        col = min(col, self.cols - 1) if col == self.cols else col
        row = min(row, self.rows - 1) if row == self.rows else row
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValueError(f"point {p} outside the decomposed workspace")
        return self.index(col, row)

    def neighbors(self, index: int):
        """Yield (neighbour, step cost) over free cells, without corner cutting."""
        col, row = self.cell(index)
        cols, rows, blocked = self.cols, self.rows, self.blocked
        for dc, dr in _MOVES:
            c, r = col + dc, row + dr
            if not (0 <= c < cols and 0 <= r < rows):
                continue
            n = r * cols + c
            if blocked[n]:
                continue
            if dc and dr:
                if blocked[row * cols + c] or blocked[r * cols + col]:
                    continue
                yield n, SQRT2
            else:
                yield n, 1.0


def decompose(workspace: Workspace, obstacles: Sequence[ObstacleRect], cell_size: float) -> CellGraph:
    """Grid the workspace; a cell is blocked when its closed square meets any obstacle."""
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    x0, y0, x1, y1 = workspace
    cols = max(1, math.ceil((x1 - x0) / cell_size - 1e-9))
    rows = max(1, math.ceil((y1 - y0) / cell_size - 1e-9))
    blocked = np.zeros((rows, cols), dtype=bool)
    # slack keeps the closed-overlap test conservative under float rounding
    eps = 1e-9
    for o in obstacles:
        c_lo = max(0, math.ceil((o.x_bl - x0) / cell_size - 1 - eps))
        c_hi = min(cols - 1, math.floor((o.x_tr - x0) / cell_size + eps))
        r_lo = max(0, math.ceil((o.y_bl - y0) / cell_size - 1 - eps))
        r_hi = min(rows - 1, math.floor((o.y_tr - y0) / cell_size + eps))
        if c_lo <= c_hi and r_lo <= r_hi:
            blocked[r_lo:r_hi + 1, c_lo:c_hi + 1] = True
    return CellGraph(cols, rows, float(cell_size), (float(x0), float(y0)), blocked)


def octile(graph: CellGraph, a: int, b: int) -> float:
    ca, ra = graph.cell(a)
    cb, rb = graph.cell(b)
    dx, dy = abs(ca - cb), abs(ra - rb)
    return (SQRT2 - 1.0) * min(dx, dy) + max(dx, dy)


@dataclass(frozen=True)
class SearchResult:
    path: Optional[List[int]]
    cost: float
    expanded: int


def _reconstruct(parent: dict, goal: int) -> List[int]:
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def _path_cost(path: Sequence[int], graph: CellGraph) -> float:
    cost = 0.0
    for a, b in zip(path, path[1:]):
        ca, ra = graph.cell(a)
        cb, rb = graph.cell(b)
        cost += SQRT2 if (ca != cb and ra != rb) else 1.0
    return cost


def bfs_search(graph: CellGraph, start: int, goal: int) -> SearchResult:
    """Hop-count BFS; ``expanded`` counts dequeued nodes up to and including the goal."""
    parent = {start: None}
    queue = deque([start])
    expanded = 0
    while queue:
        node = queue.popleft()
        expanded += 1
        if node == goal:
            path = _reconstruct(parent, goal)
            return SearchResult(path, _path_cost(path, graph), expanded)
        for n, _ in graph.neighbors(node):
            if n not in parent:
                parent[n] = node
                queue.append(n)
    return SearchResult(None, math.inf, expanded)


def astar_search(graph: CellGraph, start: int, goal: int) -> SearchResult:
    """A* with unit / sqrt(2) edge costs and the octile heuristic; ties broken on (f, h, index)."""
    g = {start: 0.0}
    parent = {start: None}
    h0 = octile(graph, start, goal)
    heap = [(h0, h0, start)]
    closed = set()
    expanded = 0
    while heap:
        _, _, node = heapq.heappop(heap)
        if node in closed:
            continue
        closed.add(node)
        expanded += 1
        if node == goal:
            return SearchResult(_reconstruct(parent, goal), g[goal], expanded)
        g_node = g[node]
        for n, w in graph.neighbors(node):
            if n in closed:
                continue
            cand = g_node + w
            if cand < g.get(n, math.inf):
                g[n] = cand
                parent[n] = node
                h = octile(graph, n, goal)
                heapq.heappush(heap, (cand + h, h, n))
    return SearchResult(None, math.inf, expanded)


def simplify(waypoints: Sequence[Sequence[float]], tol: float = 1e-9) -> List[Tuple[float, ...]]:
    """Drop interior waypoints that are collinear with their neighbours (and exact repeats)."""
    pts = [tuple(w) for w in waypoints]
    if not pts:
        raise ValueError("simplify needs at least one waypoint")
    out = [pts[0]]
    for i in range(1, len(pts)):
        p = pts[i]
        if p[:2] == out[-1][:2]:
            continue
        if len(out) >= 2 and i < len(pts):
            a, b = out[-2], out[-1]
            cross = (b[0] - a[0]) * (p[1] - b[1]) - (b[1] - a[1]) * (p[0] - b[0])
            dot = (b[0] - a[0]) * (p[0] - b[0]) + (b[1] - a[1]) * (p[1] - b[1])
            if abs(cross) <= tol and dot > 0:
                out[-1] = p
                continue
        out.append(p)
    return out


def _plan(
    search, planner: Planner, graph: CellGraph, start: Point, goal: Point
) -> Union[MotionPlan, NoPlan]:
    s, g = graph.locate(start), graph.locate(goal)
    if graph.blocked[s]:
        raise ValueError(f"start {start} lies in a blocked cell")
    if graph.blocked[g]:
        raise ValueError(f"goal {goal} lies in a blocked cell")
    t0 = time.perf_counter()
    res = search(graph, s, g)
    elapsed = time.perf_counter() - t0
    stats = GraphStats(graph.num_nodes, graph.num_edges, res.expanded, res.cost)
    if res.path is None:
        return NoPlan("goal unreachable in the cell graph", stats=stats, solve_time=elapsed)
    # start and goal join the path inside their own (free, convex) cells
    pts = [tuple(start)] + [graph.center(n) for n in res.path] + [tuple(goal)]
    return MotionPlan(tuple(simplify(pts)), planner, stats, elapsed)


def bfs_plan(graph: CellGraph, start: Point, goal: Point) -> Union[MotionPlan, NoPlan]:
    return _plan(bfs_search, Planner.BFS, graph, start, goal)


def astar_plan(graph: CellGraph, start: Point, goal: Point) -> Union[MotionPlan, NoPlan]:
    return _plan(astar_search, Planner.ASTAR, graph, start, goal)
