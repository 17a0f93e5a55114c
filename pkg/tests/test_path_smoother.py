import math

import numpy as np
import pytest

from asvplan.astar import GridPath, astar_search, build_grid
from asvplan.errors import InfeasibleCorner
from asvplan.obstacles import EllipseObstacle, ObstacleSet
from asvplan.path_smoother import (
    Arc,
    Straight,
    WaypointPath,
    connect_waypoints,
    corner_geometry,
    eval_path,
    path_to_csv,
    reduce_waypoints,
)

from oracles import min_visible_subsequence


def _raw(points):
    return GridPath(nodes=(), length=0.0, points=tuple(points))


def test_reduce_collinear():
    pts = [(float(i), 2.0 * i) for i in range(10)]
    assert reduce_waypoints(_raw(pts), ObstacleSet()).waypoints == (pts[0], pts[-1])


def test_reduce_two_points():
    pts = [(0.0, 0.0), (3.0, 4.0)]
    assert reduce_waypoints(_raw(pts), ObstacleSet()).waypoints == tuple(pts)


def test_reduce_l_corridor():
    # a wall from the south edge; the route hooks over its tip
    wall = ObstacleSet((EllipseObstacle(50.0, 0.0, 6.0, 62.0),))
    grid = build_grid(wall, (0, 100, -10, 100), 10)
    raw = astar_search(grid, wall, (0, 0), (100, 0))
    wp = reduce_waypoints(raw, wall)
    assert len(wp.waypoints) == min_visible_subsequence(raw.points, wall) == 3


def test_waypoint_path_validation():
    with pytest.raises(ValueError):
        WaypointPath(((0.0, 0.0),))
    with pytest.raises(ValueError):
        WaypointPath(((0.0, 0.0), (0.0, 0.0), (1.0, 1.0)))


def test_collinear_segments_single_straight():
    g = connect_waypoints(WaypointPath(((0, 0), (10, 0), (30, 0))), 10, 24.5)
    assert len(g.elements) == 1 and isinstance(g.elements[0], Straight)
    assert g.total_length == pytest.approx(30.0)


def test_right_angle_clamped_radius():
    assert corner_geometry(math.pi / 2, 10.0, 24.5) == pytest.approx((24.5, 24.5))
    g = connect_waypoints(WaypointPath(((0, 0), (100, 0), (100, 100))), 10, 24.5)
    (arc,) = g.arcs
    assert arc.radius == pytest.approx(24.5)
    assert g.elements[0].end == pytest.approx((75.5, 0.0))


def test_right_angle_acceptance_radius():
    g = connect_waypoints(WaypointPath(((0, 0), (100, 0), (100, 100))), 10, 5)
    (arc,) = g.arcs
    assert arc.radius == pytest.approx(10.0)
    assert arc.length == pytest.approx(10 * math.pi / 2)
    # both legs are tangent to the arc circle: centre at distance R from each line
    cx, cy = arc.center
    assert abs(cy - 0.0) == pytest.approx(10.0)
    assert abs(cx - 100.0) == pytest.approx(10.0)


def test_reversal_and_short_legs_rejected():
    with pytest.raises(InfeasibleCorner):
        connect_waypoints(WaypointPath(((0, 0), (10, 0), (0, 0.0))), 10, 24.5)
    with pytest.raises(InfeasibleCorner) as exc:
        connect_waypoints(WaypointPath(((0, 0), (10, 0), (10, 10))), 10, 24.5)
    assert exc.value.index == 1


def test_eval_path_ends_and_turn_rate():
    wp = WaypointPath(((0, 0), (200, 0), (300, 150), (300, 400)))
    g = connect_waypoints(wp, 10, 24.5)
    u = 2.5
    p0, g0, _ = eval_path(g, 0.0, u)
    np.testing.assert_allclose(p0, (0, 0), atol=1e-12)
    assert g0 == 0.0
    p1, _, _ = eval_path(g, g.total_length, u)
    np.testing.assert_allclose(p1, (300, 400), atol=1e-9)
    s = np.linspace(0, g.total_length, 4001)
    _, gam, rate = eval_path(g, s, u)
    h = 1e-4
    joints = g.offsets
    for si in s[1:-1]:
        if np.min(np.abs(joints - si)) < 10 * h:
            continue
        _, ga, _ = eval_path(g, si - h, u)
        _, gb, r = eval_path(g, si + h, u)
        _, _, r0 = eval_path(g, si, u)
        assert (gb - ga) / (2 * h) * u == pytest.approx(r0, abs=1e-6)
    with pytest.raises(ValueError):
        eval_path(g, g.total_length + 1.0, u)


def test_arc_direction_sign():
    g = connect_waypoints(WaypointPath(((0, 0), (100, 0), (100, -100))), 10, 24.5)
    arc = g.arcs[0]
    assert isinstance(arc, Arc) and arc.sweep < 0
    _, gam, rate = eval_path(g, np.array([g.offsets[1] + 1.0]), 2.0)
    assert rate[0] < 0


def test_path_csv_header():
    g = connect_waypoints(WaypointPath(((0, 0), (100, 0))), 10, 24.5)
    text = path_to_csv(g, 2.0, n=5)
    assert text.splitlines()[0] == "s,x,y,gamma,r"
    assert len(text.splitlines()) == 6
