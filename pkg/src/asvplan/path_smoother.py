"""Waypoint reduction and straight/arc connection of the grid path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from asvplan.astar import GridPath
from asvplan.errors import InfeasibleCorner
from asvplan.obstacles import ObstacleSet, segment_in_collision


@dataclass(frozen=True)
class WaypointPath:
    waypoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        wps = tuple((float(p[0]), float(p[1])) for p in self.waypoints)
        if len(wps) < 2:
            raise ValueError("a waypoint path needs at least two points")
        for a, b in zip(wps, wps[1:]):
            if a == b:
                raise ValueError(f"repeated consecutive waypoint {a}")
        object.__setattr__(self, "waypoints", wps)


@dataclass(frozen=True)
class Straight:
    start: tuple[float, float]
    end: tuple[float, float]
    gamma: float

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float]
    radius: float
    gamma0: float
    sweep: float

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)


Element = Union[Straight, Arc]


@dataclass(frozen=True, eq=False)
class GeomPath:
    elements: tuple[Element, ...]
    total_length: float
    offsets: np.ndarray

    @classmethod
    def from_elements(cls, elements: Sequence[Element]) -> "GeomPath":
        lengths = np.array([e.length for e in elements], dtype=float)
        offsets = np.concatenate(([0.0], np.cumsum(lengths)))
        offsets.setflags(write=False)
        return cls(tuple(elements), float(offsets[-1]), offsets)

    @property
    def arcs(self) -> list[Arc]:
        return [e for e in self.elements if isinstance(e, Arc)]


def reduce_waypoints(raw: GridPath, obs_set: ObstacleSet) -> WaypointPath:
    """Greedy line-of-sight reduction, walking back from the goal.

    From the current point, jump to the lowest-index earlier point it can see;
    consecutive grid points always see each other, so this terminates.
    """
    pts = list(raw.points)
    i = len(pts) - 1
    out = [pts[i]]
    while i > 0:
        for j in range(i):
            if not segment_in_collision(obs_set, pts[i], pts[j], use_inflation=True):
                out.append(pts[j])
                i = j
                break
        else:  # pragma: no cover - consecutive points are collision-free by construction
            raise RuntimeError("grid path contains a colliding edge")
    out.reverse()
    return WaypointPath(tuple(out))


def _wrap(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def corner_geometry(delta_gamma: float, R_acc: float, R_min: float) -> tuple[float, float]:
    """Turn radius and tangent-point offset for a course change of ``delta_gamma``."""
    half = abs(delta_gamma) / 2.0
    radius = max(R_min, R_acc / math.tan(half))
    return radius, radius * math.tan(half)


def connect_waypoints(
    wp: WaypointPath, R_acc: float, R_min: float, angle_tol: float = 1e-12
) -> GeomPath:
    if not (R_acc > 0 and R_min > 0):
        raise ValueError("R_acc and R_min must be positive")
    pts = np.array(wp.waypoints, dtype=float)
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    if (seg_len <= 0).any():
        raise ValueError("zero-length waypoint segment")
    dirs = seg / seg_len[:, None]
    headings = np.arctan2(seg[:, 1], seg[:, 0])

    n_seg = len(seg)
    # unwrapped course of each segment
    gammas = [float(headings[0])]
    offsets = np.zeros(n_seg + 1)  # tangent-point offset at each waypoint
    corners = {}
    for k in range(1, n_seg):
        dg = _wrap(headings[k] - headings[k - 1])
        gammas.append(gammas[-1] + dg)
        if abs(dg) <= angle_tol:
            continue
        if abs(dg) >= math.pi - angle_tol:
            raise InfeasibleCorner(k, "course reversal cannot be filleted")
        radius, d = corner_geometry(dg, R_acc, R_min)
        if d > 0.5 * seg_len[k - 1] or d > 0.5 * seg_len[k]:
            raise InfeasibleCorner(
                k,
                f"tangent offset {d:.3f} m exceeds half an adjacent segment "
                f"({seg_len[k - 1]:.3f} m, {seg_len[k]:.3f} m)",
            )
        offsets[k] = d
        corners[k] = (radius, dg)

    elements: list[Element] = []
    for k in range(n_seg):
        a = pts[k] + offsets[k] * dirs[k]
        b = pts[k + 1] - offsets[k + 1] * dirs[k]
        if k > 0 and k in corners:
            radius, dg = corners[k]
            sign = 1.0 if dg > 0 else -1.0
            t_in = dirs[k - 1]
            entry = pts[k] - offsets[k] * t_in
            normal = np.array([-t_in[1], t_in[0]])
            center = entry + sign * radius * normal
            elements.append(Arc((float(center[0]), float(center[1])), radius, gammas[k - 1], dg))
        if np.hypot(*(b - a)) > 0:
            prev = elements[-1] if elements else None
            if isinstance(prev, Straight) and k not in corners:
                # straight-through waypoint: extend the previous leg
                a = np.asarray(prev.start)
                elements.pop()
            elements.append(Straight((float(a[0]), float(a[1])), (float(b[0]), float(b[1])), gammas[k]))
    return GeomPath.from_elements(elements)


def eval_path(g: GeomPath, s, u_nom: float):
    """Position, unwrapped tangent angle and turn rate at arc length(s) ``s``."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    tol = 1e-9 * max(1.0, g.total_length)
    if (s_arr < -tol).any() or (s_arr > g.total_length + tol).any():
        raise ValueError(f"arc length outside [0, {g.total_length}]")
    s_arr = np.clip(s_arr, 0.0, g.total_length)
    idx = np.clip(np.searchsorted(g.offsets, s_arr, side="right") - 1, 0, len(g.elements) - 1)
    pos = np.empty((s_arr.size, 2))
    gam = np.empty(s_arr.size)
    rate = np.zeros(s_arr.size)
    for e_idx in np.unique(idx):
        mask = idx == e_idx
        e = g.elements[e_idx]
        ds = s_arr[mask] - g.offsets[e_idx]
        if isinstance(e, Straight):
            c, sn = math.cos(e.gamma), math.sin(e.gamma)
            pos[mask, 0] = e.start[0] + ds * c
            pos[mask, 1] = e.start[1] + ds * sn
            gam[mask] = e.gamma
        else:
            sign = 1.0 if e.sweep > 0 else -1.0
            ga = e.gamma0 + sign * ds / e.radius
            pos[mask, 0] = e.center[0] + sign * e.radius * np.sin(ga)
            pos[mask, 1] = e.center[1] - sign * e.radius * np.cos(ga)
            gam[mask] = ga
            rate[mask] = sign * u_nom / e.radius
    if np.ndim(s) == 0:
        return pos[0], float(gam[0]), float(rate[0])
    return pos, gam, rate


def path_to_csv(g: GeomPath, u_nom: float, n: int = 1001) -> str:
    s = np.linspace(0.0, g.total_length, n)
    pos, gam, rate = eval_path(g, s, u_nom)
    lines = ["s,x,y,gamma,r"]
    for row in zip(s, pos[:, 0], pos[:, 1], gam, rate):
        lines.append(",".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"
