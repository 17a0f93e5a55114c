"""Independent reference implementations used by the tests."""

from itertools import combinations

import numpy as np
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra

from asvplan.astar import MOVES, edge_free
from asvplan.obstacles import segment_in_collision


def dijkstra_length(grid, obs, s_node, g_node) -> float:
    """Shortest 8-connected path length with scipy's Dijkstra on the same edge set."""
    n = grid.width * grid.height
    idx = lambda i, j: i * grid.height + j  # noqa: E731
    W = lil_matrix((n, n))
    for i in range(grid.width):
        for j in range(grid.height):
            for di, dj, diag in MOVES:
                nb = (i + di, j + dj)
                if grid.contains(nb) and edge_free(grid, obs, (i, j), nb):
                    W[idx(i, j), idx(*nb)] = grid.spacing * (np.sqrt(2.0) if diag else 1.0)
    dist = dijkstra(W.tocsr(), directed=True, indices=idx(*s_node))
    return float(dist[idx(*g_node)])


def min_visible_subsequence(points, obs) -> int:
    """Smallest number of points, endpoints included, whose consecutive segments are collision-free."""
    n = len(points)
    if n <= 2:
        return n
    free = lambda a, b: not segment_in_collision(obs, points[a], points[b], use_inflation=True)  # noqa: E731
    for k in range(0, n - 1):
        for inner in combinations(range(1, n - 1), k):
            chain = (0,) + inner + (n - 1,)
            if all(free(a, b) for a, b in zip(chain, chain[1:])):
                return k + 2
    return n


def simpson(y, x):
    """Composite Simpson on an odd number of equally spaced samples."""
    n = len(y)
    if n % 2 == 0:
        raise ValueError("need an odd number of samples")
    h = (x[-1] - x[0]) / (n - 1)
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def central_jacobian(fun, w, scale):
    """Dense central-difference Jacobian; step ``eps^(1/3) * max(|w_i|, scale_i)``."""
    step = np.cbrt(np.finfo(float).eps) * np.maximum(np.abs(w), scale)
    cols = []
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = step[i]
        cols.append((fun(w + e) - fun(w - e)) / (2.0 * step[i]))
    return np.column_stack(cols)


def rk4_resimulate(params, weights, z, u, h):
    """One classical RK4 step of the 7-state ODE written directly on the model's f and F."""
    from asvplan.vessel_model import cost_to_go, dynamics

    def rhs(s):
        return np.append(dynamics(params, s[:6], u), cost_to_go(weights, params, s[:6], u))

    k1 = rhs(z)
    k2 = rhs(z + 0.5 * h * k1)
    k3 = rhs(z + 0.5 * h * k2)
    k4 = rhs(z + h * k3)
    return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
