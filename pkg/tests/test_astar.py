import math

import numpy as np
import pytest

from asvplan.astar import astar_search, build_grid
from asvplan.errors import NoPathFound, SnapFailed
from asvplan.obstacles import EllipseObstacle, ObstacleSet


def test_grid_sizes_and_blocking():
    g = build_grid(ObstacleSet(), (0, 100, 0, 100), 50)
    assert (g.width, g.height) == (3, 3)
    assert not g.blocked.any()
    big = ObstacleSet((EllipseObstacle(50, 50, 1000, 1000),))
    assert build_grid(big, (0, 100, 0, 100), 50).blocked.all()
    assert build_grid(ObstacleSet(), (0, 100, 0, 60), 25).height == 3


def test_diagonal_path():
    g = build_grid(ObstacleSet(), (0, 100, 0, 100), 50)
    p = astar_search(g, ObstacleSet(), (0, 0), (100, 100))
    assert p.length == pytest.approx(2 * math.sqrt(2) * 50)
    assert p.nodes == ((0, 0), (1, 1), (2, 2))


def test_start_equals_goal():
    g = build_grid(ObstacleSet(), (0, 100, 0, 100), 50)
    p = astar_search(g, ObstacleSet(), (50, 50), (50, 50))
    assert p.nodes == ((1, 1),)
    assert p.length == 0.0


def test_off_grid_endpoints_are_kept():
    g = build_grid(ObstacleSet(), (0, 100, 0, 100), 50)
    p = astar_search(g, ObstacleSet(), (3, 4), (97, 99))
    assert p.points[0] == (3.0, 4.0)
    assert p.points[-1] == (97.0, 99.0)


def test_detour_around_wall():
    wall = ObstacleSet((EllipseObstacle(50, 50, 5, 45),))
    g = build_grid(wall, (0, 100, 0, 100), 10)
    p = astar_search(g, wall, (0, 50), (100, 50))
    assert p.length > 100
    assert all(not g.blocked[n] for n in p.nodes)


def test_unreachable_goal():
    wall = ObstacleSet((EllipseObstacle(50, 50, 5, 500),))
    g = build_grid(wall, (0, 100, 0, 100), 10)
    with pytest.raises(NoPathFound):
        astar_search(g, wall, (0, 50), (100, 50))


def test_snap_failure():
    blob = ObstacleSet((EllipseObstacle(50, 50, 30, 30),))
    g = build_grid(blob, (0, 100, 0, 100), 10)
    with pytest.raises(SnapFailed):
        astar_search(g, blob, (50, 50), (0, 0))


def test_expanded_nodes_are_unique():
    rng = np.random.default_rng(0)
    obs = ObstacleSet(tuple(EllipseObstacle(*rng.uniform(10, 90, 2), *rng.uniform(3, 10, 2), rng.uniform(0, 3))
                            for _ in range(4)))
    g = build_grid(obs, (0, 100, 0, 100), 5)
    try:
        p = astar_search(g, obs, (0, 0), (100, 100))
    except NoPathFound:
        pytest.skip("random map blocked")
    assert len(set(p.expanded)) == len(p.expanded)


def test_heuristic_admissible_and_edges_free():
    from asvplan.obstacles import segment_in_collision

    from oracles import dijkstra_length

    rng = np.random.default_rng(14)
    obs = ObstacleSet(tuple(EllipseObstacle(*rng.uniform(2, 17, 2), *rng.uniform(0.6, 3, 2), rng.uniform(0, 3))
                            for _ in range(6)))
    g = build_grid(obs, (0, 19, 0, 19), 1.0)
    free = np.argwhere(~g.blocked)
    a, b = free[0], free[-1]
    try:
        p = astar_search(g, obs, g.point(tuple(a)), g.point(tuple(b)))
    except NoPathFound:
        pytest.skip("random map blocked")
    for n in p.expanded[::10]:
        remaining = dijkstra_length(g, obs, n, tuple(b))
        x, y = g.point(n)
        gx, gy = g.point(tuple(b))
        assert math.hypot(gx - x, gy - y) <= remaining + 1e-12
    for u, v in zip(p.points, p.points[1:]):
        assert not segment_in_collision(obs, u, v)
