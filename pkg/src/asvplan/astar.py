"""Uniform-grid A* with Euclidean edge cost and straight-line heuristic."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from asvplan.errors import NoPathFound, SnapFailed
from asvplan.obstacles import ObstacleSet, points_in_collision, segment_in_collision

SQRT2 = math.sqrt(2.0)
# (di, dj, is_diagonal)
MOVES = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1))


@dataclass(frozen=True, eq=False)
class Grid:
    """Node (i, j) sits at ``origin + (i, j) * spacing``; i runs along x."""

    origin: tuple[float, float]
    spacing: float
    width: int
    height: int
    blocked: np.ndarray

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        if self.width < 2 or self.height < 2:
            raise ValueError("grid needs at least 2x2 nodes")
        if self.blocked.shape != (self.width, self.height):
            raise ValueError("blocked mask does not match grid size")

    def point(self, node) -> tuple[float, float]:
        i, j = node
        return (self.origin[0] + i * self.spacing, self.origin[1] + j * self.spacing)

    def contains(self, node) -> bool:
        i, j = node
        return 0 <= i < self.width and 0 <= j < self.height

    def to_csv(self) -> str:
        lines = ["i,j,x,y,blocked"]
        for i in range(self.width):
            for j in range(self.height):
                x, y = self.point((i, j))
                lines.append(f"{i},{j},{x:.6f},{y:.6f},{int(self.blocked[i, j])}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GridPath:
    nodes: tuple[tuple[int, int], ...]
    length: float
    points: tuple[tuple[float, float], ...]
    expanded: tuple[tuple[int, int], ...] = ()


def build_grid(obs_set: ObstacleSet, bounds, spacing: float) -> Grid:
    """Grid over ``bounds = (x_min, x_max, y_min, y_max)``; nodes blocked by inflated obstacles."""
    x_min, x_max, y_min, y_max = (float(b) for b in bounds)
    if not (x_max > x_min and y_max > y_min):
        raise ValueError("degenerate map bounds")
    if not spacing > 0:
        raise ValueError("grid spacing must be positive")
    width = int(math.floor((x_max - x_min) / spacing + 1e-9)) + 1
    height = int(math.floor((y_max - y_min) / spacing + 1e-9)) + 1
    xs = x_min + spacing * np.arange(width)
    ys = y_min + spacing * np.arange(height)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    blocked = points_in_collision(obs_set, X, Y, use_inflation=True)
    blocked.setflags(write=False)
    return Grid((x_min, y_min), float(spacing), width, height, blocked)


def edge_free(grid: Grid, obs_set: ObstacleSet, a, b) -> bool:
    if grid.blocked[a] or grid.blocked[b]:
        return False
    return not segment_in_collision(obs_set, grid.point(a), grid.point(b), use_inflation=True)


def _snap(grid: Grid, obs_set: ObstacleSet, p) -> tuple[int, int]:
    fi = (p[0] - grid.origin[0]) / grid.spacing
    fj = (p[1] - grid.origin[1]) / grid.spacing
    best = None
    for i in range(int(math.floor(fi)) - 1, int(math.ceil(fi)) + 2):
        for j in range(int(math.floor(fj)) - 1, int(math.ceil(fj)) + 2):
            node = (i, j)
            if not grid.contains(node) or grid.blocked[node]:
                continue
            q = grid.point(node)
            d = math.hypot(q[0] - p[0], q[1] - p[1])
            if d > grid.spacing + 1e-9:
                continue
            if d > 0 and segment_in_collision(obs_set, p, q, use_inflation=True):
                continue
            key = (d, node)
            if best is None or key < best:
                best = key
    if best is None:
        raise SnapFailed(f"no free grid node within {grid.spacing} m of {tuple(p)}")
    return best[1]


def _length(spacing, n_straight, n_diag):
    # counted moves keep equal-length paths bit-identical regardless of order
    return spacing * (n_straight + n_diag * SQRT2)


def astar_search(grid: Grid, obs_set: ObstacleSet, start, goal) -> GridPath:
    """Shortest 8-connected path between the nodes nearest ``start`` and ``goal``.

    Ties on f are broken by smaller h, then by node index.
    """
    s = _snap(grid, obs_set, start)
    g = _snap(grid, obs_set, goal)
    gx, gy = grid.point(g)

    def h(node):
        x, y = grid.point(node)
        return math.hypot(gx - x, gy - y)

    counts = {s: (0, 0)}
    parent = {s: None}
    closed = set()
    expanded = []
    heap = [(h(s), h(s), s)]
    edge_cache = {}
    while heap:
        _, _, node = heapq.heappop(heap)
        if node in closed:
            continue
        closed.add(node)
        expanded.append(node)
        if node == g:
            break
        ns, nd = counts[node]
        for di, dj, diag in MOVES:
            nb = (node[0] + di, node[1] + dj)
            if not grid.contains(nb) or nb in closed:
                continue
            key = (min(node, nb), max(node, nb))
            ok = edge_cache.get(key)
            if ok is None:
                ok = edge_cache[key] = edge_free(grid, obs_set, node, nb)
            if not ok:
                continue
            cand = (ns + 1 - diag, nd + diag)
            g_new = _length(grid.spacing, *cand)
            old = counts.get(nb)
            if old is not None and _length(grid.spacing, *old) <= g_new:
                continue
            counts[nb] = cand
            parent[nb] = node
            hn = h(nb)
            heapq.heappush(heap, (g_new + hn, hn, nb))
    if g not in closed:
        raise NoPathFound(f"goal {tuple(goal)} unreachable from {tuple(start)}")

    nodes = [g]
    while parent[nodes[-1]] is not None:
        nodes.append(parent[nodes[-1]])
    nodes.reverse()
    points = [grid.point(n) for n in nodes]
    start_pt = (float(start[0]), float(start[1]))
    goal_pt = (float(goal[0]), float(goal[1]))
    if start_pt != points[0]:
        points.insert(0, start_pt)
    if goal_pt != points[-1]:
        points.append(goal_pt)
    return GridPath(
        nodes=tuple(nodes),
        length=_length(grid.spacing, *counts[g]),
        points=tuple(points),
        expanded=tuple(expanded),
    )
