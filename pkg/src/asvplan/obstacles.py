"""Rotated-ellipse obstacles: smooth log constraint and collision predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from asvplan import dual


@dataclass(frozen=True)
class EllipseObstacle:
    x_c: float
    y_c: float
    x_a: float
    y_a: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.x_a > 0 and self.y_a > 0):
            raise ValueError("ellipse semi-axes must be positive")


def ellipse_q(obs: EllipseObstacle, x, y, inflation: float = 0.0):
    """Normalized rotated quadratic; < 1 strictly inside the ellipse."""
    dx = x - obs.x_c
    dy = y - obs.y_c
    ca, sa = np.cos(obs.alpha), np.sin(obs.alpha)
    p = (dx * ca + dy * sa) / (obs.x_a + inflation)
    q = (-dx * sa + dy * ca) / (obs.y_a + inflation)
    return p * p + q * q


def g_o(obs: EllipseObstacle, eps: float, x, y):
    """Smooth obstacle constraint, <= 0 outside and on the boundary.

    Works on floats, arrays and :class:`~asvplan.dual.Dual` coordinates.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    return -dual.log(ellipse_q(obs, x, y) + eps) + np.log1p(eps)


@dataclass(frozen=True)
class ObstacleSet:
    obstacles: tuple[EllipseObstacle, ...] = ()
    epsilon: float = 1e-6
    inflation: float = 0.0
    _arrays: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.inflation < 0:
            raise ValueError("inflation must be nonnegative")
        arr = np.array(
            [[o.x_c, o.y_c, o.x_a, o.y_a, np.cos(o.alpha), np.sin(o.alpha)] for o in self.obstacles],
            dtype=float,
        ).reshape(-1, 6)
        object.__setattr__(self, "_arrays", arr)

    def __len__(self) -> int:
        return len(self.obstacles)

    def _to_unit_frames(self, px, py, use_inflation):
        """Points mapped into every ellipse's unit-circle frame, shape (n_obs, ...)."""
        xc, yc, xa, ya, ca, sa = (self._arrays[:, i] for i in range(6))
        infl = self.inflation if use_inflation else 0.0
        ext = (slice(None),) + (None,) * np.ndim(px)
        dx = np.asarray(px, dtype=float)[None] - xc[ext]
        dy = np.asarray(py, dtype=float)[None] - yc[ext]
        a = (dx * ca[ext] + dy * sa[ext]) / (xa[ext] + infl)
        b = (-dx * sa[ext] + dy * ca[ext]) / (ya[ext] + infl)
        return a, b

    def q_values(self, x, y, use_inflation: bool = False) -> np.ndarray:
        a, b = self._to_unit_frames(x, y, use_inflation)
        return a * a + b * b

    def g_values(self, x, y) -> np.ndarray:
        """g_o of every obstacle at the given point(s), shape (n_obs, ...)."""
        return -np.log(self.q_values(x, y) + self.epsilon) + np.log1p(self.epsilon)


def point_in_collision(obs_set: ObstacleSet, x: float, y: float, use_inflation: bool = True) -> bool:
    if not len(obs_set):
        return False
    return bool((obs_set.q_values(x, y, use_inflation) < 1.0).any())


def points_in_collision(obs_set: ObstacleSet, x, y, use_inflation: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not len(obs_set):
        return np.zeros(x.shape, dtype=bool)
    return (obs_set.q_values(x, y, use_inflation) < 1.0).any(axis=0)


def segment_in_collision(
    obs_set: ObstacleSet,
    p1: Sequence[float],
    p2: Sequence[float],
    use_inflation: bool = True,
) -> bool:
    """True iff the closed segment p1-p2 meets the open interior of an ellipse.

    The segment is mapped into each ellipse's unit-circle frame, where
    ``|a + t d|^2 < 1`` is a quadratic in ``t``; tangency does not count.
    """
    if not len(obs_set):
        return False
    ax, ay = obs_set._to_unit_frames(p1[0], p1[1], use_inflation)
    bx, by = obs_set._to_unit_frames(p2[0], p2[1], use_inflation)
    dx, dy = bx - ax, by - ay
    A = dx * dx + dy * dy
    B = ax * dx + ay * dy
    C = ax * ax + ay * ay - 1.0
    if (C < 0).any():
        return True
    disc = B * B - A * C
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        t1 = (-B - sq) / A
        t2 = (-B + sq) / A
    hit = (A > 0) & (disc > 0) & (t1 < 1.0) & (t2 > 0.0)
    return bool(hit.any())
