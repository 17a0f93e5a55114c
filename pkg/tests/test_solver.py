import numpy as np
import pytest

from asvplan import layout
from asvplan.obstacles import ObstacleSet
from asvplan.solver import FunctionNlp, SolverConfig, Status, constraint_violation, solve
from asvplan.transcription import transcribe
from asvplan.vessel_model import CostWeights, shooting_map
from asvplan.warmstart import sample_to_grid, straight_line

INF = np.inf


def test_unconstrained_quadratic():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -4.0])
    p = FunctionNlp(
        w_lb=np.full(2, -INF), w_ub=np.full(2, INF),
        f=lambda w: 0.5 * w @ A @ w - b @ w, grad=lambda w: A @ w - b,
    )
    sol = solve(p, np.zeros(2), SolverConfig(kkt_tolerance=1e-10))
    assert sol.converged
    np.testing.assert_allclose(sol.w_star, np.linalg.solve(A, b), atol=1e-8)


def test_equality_constrained():
    p = FunctionNlp(
        w_lb=np.full(2, -INF), w_ub=np.full(2, INF),
        f=lambda w: w @ w, grad=lambda w: 2 * w,
        g_lb=np.array([1.0]), g_ub=np.array([1.0]),
        g=lambda w: np.array([w.sum()]), jac=lambda w: np.ones((1, 2)),
    )
    sol = solve(p, np.array([3.0, -1.0]))
    assert sol.status is Status.CONVERGED
    np.testing.assert_allclose(sol.w_star, [0.5, 0.5], atol=1e-6)
    np.testing.assert_allclose(sol.multipliers, [-1.0], atol=1e-5)


def test_inequality_and_bounds():
    # min (x-2)^2 + (y-2)^2  s.t.  x^2 + y^2 <= 2,  y <= 0.5
    p = FunctionNlp(
        w_lb=np.array([-INF, -INF]), w_ub=np.array([INF, 0.5]),
        f=lambda w: ((w - 2) ** 2).sum(), grad=lambda w: 2 * (w - 2),
        g_lb=np.array([-INF]), g_ub=np.array([2.0]),
        g=lambda w: np.array([w @ w]), jac=lambda w: 2 * w[None, :],
    )
    sol = solve(p, np.zeros(2))
    assert sol.converged
    np.testing.assert_allclose(sol.w_star, [np.sqrt(1.75), 0.5], atol=1e-6)
    assert sol.obstacle_violation <= 1e-6


def test_iteration_limit_reported():
    p = FunctionNlp(
        w_lb=np.full(2, -INF), w_ub=np.full(2, INF),
        f=lambda w: w @ w, grad=lambda w: 2 * w,
        g_lb=np.array([1.0]), g_ub=np.array([1.0]),
        g=lambda w: np.array([w.sum()]), jac=lambda w: np.ones((1, 2)),
    )
    sol = solve(p, np.array([3.0, -1.0]), SolverConfig(max_outer_iterations=1, max_inner_iterations=1))
    assert sol.status is Status.ITERATION_LIMIT and not sol.converged


def test_evaluation_failure_reported():
    p = FunctionNlp(
        w_lb=np.full(1, -INF), w_ub=np.full(1, INF),
        f=lambda w: np.log(w[0]), grad=lambda w: 1 / w,
    )
    sol = solve(p, np.array([-1.0]))
    assert sol.status is Status.EVALUATION_FAILURE


def test_constraint_violation_helper():
    g = np.array([0.1, -3.0, 5.0])
    eq, ineq = constraint_violation(g, np.array([0.0, -INF, 0.0]), np.array([0.0, 0.0, 4.0]))
    assert eq == pytest.approx(0.1) and ineq == pytest.approx(1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(kkt_tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(penalty_growth=1.0)


def test_small_ocp_is_dynamically_consistent(params):
    weights = CostWeights(abs_smoothing=1.0)
    N, t_max = 5, 20.0
    p = transcribe((0, 0, 2.0), (40, 5), t_max, params, weights, ObstacleSet(), N)
    guess = sample_to_grid(straight_line((0, 0), (40, 5), t_max, params, weights, 10 * N + 1), N)
    sol = solve(p, guess, SolverConfig(trace=True))
    assert sol.converged
    assert sol.equality_residual <= 1e-6
    Z, U = layout.unpack(sol.w_star)
    for k in range(N):
        np.testing.assert_allclose(shooting_map(params, weights, Z[k], U[k], p.h), Z[k + 1], atol=1e-6)
    assert sol.objective == pytest.approx(Z[-1, 6])
    lines = sol.trace_csv().splitlines()
    assert lines[0].startswith("outer,inner,merit")
    assert len(lines) == sol.inner_iterations + 1


def test_determinism_and_monotone_merit(params):
    weights = CostWeights(abs_smoothing=1.0)
    p = transcribe((0, 0, 2.0), (40, 5), 20.0, params, weights, ObstacleSet(), 5)
    guess = sample_to_grid(straight_line((0, 0), (40, 5), 20.0, params, weights, 51), 5)
    a = solve(p, guess, SolverConfig(trace=True))
    b = solve(p, guess, SolverConfig(trace=True))
    assert a.w_star.tobytes() == b.w_star.tobytes()
    assert a.inner_iterations == b.inner_iterations
    for prev, row in zip(a.trace, a.trace[1:]):
        if row[0] == prev[0]:
            assert row[2] <= prev[2] + 1e-12 * abs(prev[2])
    g = p.constraints(a.w_star)
    assert np.abs(g[: p.n_shooting]).max() == pytest.approx(a.equality_residual, abs=1e-12)
