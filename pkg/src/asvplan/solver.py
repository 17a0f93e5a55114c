"""Augmented-Lagrangian NLP solver with a projected Newton inner loop.

Problem protocol (duck-typed, see :class:`FunctionNlp`): ``n_w``, ``w_lb``,
``w_ub``, ``g_lb``, ``g_ub``, ``cost(w)``, ``cost_gradient(w)``,
``constraints(w)`` and ``constraints_and_jacobian(w) -> (g, sparse J)``.
Optional hooks:

* ``scaling(w0) -> (var_scale, row_scale, obj_scale)``
* ``hessian_blocks() -> list of (n_blocks, size) index arrays``; the constraint
  curvature is assumed block-diagonal over these groups (true for multiple
  shooting, where every interval only touches its own node and control).

Rows with ``g_lb == g_ub`` are equalities; the rest are one- or two-sided
inequalities handled by the Powell-Hestenes-Rockafellar clipped penalty.

The inner minimization of the augmented Lagrangian is a projected Newton
method on the variable box. Its Hessian model is the Gauss-Newton penalty term
``rho J^T W J`` plus finite-difference blocks of the multiplier-weighted
objective/constraint curvature, clipped to be positive semidefinite. The
system is solved by banded Cholesky with a diagonal shift when needed.
"""

from __future__ import annotations

import enum
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.linalg as la

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    ITERATION_LIMIT = "IterationLimit"
    EVALUATION_FAILURE = "EvaluationFailure"


@dataclass(frozen=True)
class SolverConfig:
    kkt_tolerance: float = 1e-6
    constraint_tolerance: float = 1e-6
    max_outer_iterations: int = 100
    max_inner_iterations: int = 200
    initial_penalty: float = 10.0
    penalty_growth: float = 10.0
    max_penalty: float = 1e12
    trace: bool = False

    def __post_init__(self):
        if not (self.kkt_tolerance > 0 and self.constraint_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty growth factor must exceed 1")
        if self.max_outer_iterations < 1 or self.max_inner_iterations < 1:
            raise ValueError("iteration caps must be >= 1")
        if not self.initial_penalty > 0:
            raise ValueError("initial penalty must be positive")


@dataclass(frozen=True, eq=False)
class NlpSolution:
    w_star: np.ndarray
    objective: float
    equality_residual: float
    obstacle_violation: float
    kkt_residual: float
    outer_iterations: int
    inner_iterations: int
    function_evaluations: int
    wall_time: float
    status: Status
    multipliers: np.ndarray = field(repr=False)
    trace: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write("outer,inner,merit,equality_residual,inequality_violation,step_norm,penalty\n")
        for row in self.trace:
            buf.write(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row) + "\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class FunctionNlp:
    """Small NLP from plain callables; ``jac`` returns a dense or sparse matrix."""

    w_lb: np.ndarray
    w_ub: np.ndarray
    f: Callable
    grad: Callable
    g_lb: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g_ub: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g: Optional[Callable] = None
    jac: Optional[Callable] = None

    @property
    def n_w(self) -> int:
        return len(self.w_lb)

    def cost(self, w):
        return float(self.f(w))

    def cost_gradient(self, w):
        return np.asarray(self.grad(w), dtype=float)

    def constraints(self, w):
        if self.g is None:
            return np.zeros(0)
        return np.asarray(self.g(w), dtype=float)

    def constraints_and_jacobian(self, w):
        if self.g is None:
            return np.zeros(0), sp.csr_matrix((0, self.n_w))
        return np.asarray(self.g(w), dtype=float), sp.csr_matrix(self.jac(w))


class _EvaluationError(Exception):
    pass


def constraint_violation(g, g_lb, g_ub) -> tuple[float, float]:
    """(max |equality residual|, max inequality violation) of constraint values."""
    eq = g_lb == g_ub
    eq_res = float(np.abs(g[eq] - g_lb[eq]).max()) if eq.any() else 0.0
    ineq = ~eq
    if ineq.any():
        gi, lo, hi = g[ineq], g_lb[ineq], g_ub[ineq]
        with np.errstate(invalid="ignore"):
            viol = np.maximum(np.maximum(gi - hi, lo - gi), 0.0)
        in_res = float(viol.max())
    else:
        in_res = 0.0
    return eq_res, in_res


def projected_gradient_norm(y, grad, lb, ub) -> float:
    step = np.clip(y - grad, lb, ub) - y
    return float(np.abs(step).max()) if step.size else 0.0


class _AugLag:
    """Scaled augmented Lagrangian ``L_A(y)`` with ``w = D y``."""

    def __init__(self, problem, D, S, sigma):
        self.p = problem
        self.D = D
        self.S = S
        self.sigma = sigma
        self.g_lb = np.asarray(problem.g_lb, dtype=float)
        self.g_ub = np.asarray(problem.g_ub, dtype=float)
        self.eq = self.g_lb == self.g_ub
        self.has_lo = ~self.eq & np.isfinite(self.g_lb)
        self.has_hi = ~self.eq & np.isfinite(self.g_ub)
        m = self.g_lb.size
        self.lam = np.zeros(m)
        self.mu_hi = np.zeros(m)
        self.mu_lo = np.zeros(m)
        self.rho = 1.0
        self.n_eval = 0
        self._cache = {}

    def values(self, w):
        """Cost and constraint values (cached)."""
        key = w.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit[0], hit[1]
        self.n_eval += 1
        with np.errstate(all="ignore"):
            f = self.p.cost(w)
            g = np.asarray(self.p.constraints(w), dtype=float)
        if not (np.isfinite(f) and np.isfinite(g).all()):
            raise _EvaluationError("non-finite cost or constraint value")
        self._store(key, [f, g, None, None])
        return f, g

    def evaluate(self, w):
        key = w.tobytes()
        hit = self._cache.get(key)
        if hit is not None and hit[3] is not None:
            return tuple(hit)
        if hit is None:
            self.n_eval += 1
        f, df, g, J = self._full(w)
        self._store(key, [f, g, df, J])
        return f, g, df, J

    def _full(self, w):
        with np.errstate(all="ignore"):
            f = self.p.cost(w)
            df = np.asarray(self.p.cost_gradient(w), dtype=float)
            g, J = self.p.constraints_and_jacobian(w)
        g = np.asarray(g, dtype=float)
        if not (np.isfinite(f) and np.isfinite(g).all() and np.isfinite(df).all()):
            raise _EvaluationError("non-finite cost or constraint value")
        J = sp.csr_matrix(J)
        if J.nnz and not np.isfinite(J.data).all():
            raise _EvaluationError("non-finite constraint Jacobian")
        return f, df, g, J

    def _store(self, key, entry):
        # a few entries: the line search alternates between the base point and trials
        if key not in self._cache and len(self._cache) >= 3:
            self._cache.pop(next(iter(self._cache)))
        self._cache[key] = entry

    def shifted(self, g):
        S, rho = self.S, self.rho
        c_eq = np.where(self.eq, S * (g - self.g_lb), 0.0)
        with np.errstate(invalid="ignore"):
            c_hi = np.where(self.has_hi, S * (g - self.g_ub), 0.0)
            c_lo = np.where(self.has_lo, S * (self.g_lb - g), 0.0)
        t_eq = np.where(self.eq, self.lam + rho * c_eq, 0.0)
        t_hi = np.where(self.has_hi, np.maximum(self.mu_hi + rho * c_hi, 0.0), 0.0)
        t_lo = np.where(self.has_lo, np.maximum(self.mu_lo + rho * c_lo, 0.0), 0.0)
        return c_eq, t_eq, t_hi, t_lo

    def merit(self, y):
        f, g = self.values(self.D * y)
        c_eq, t_eq, t_hi, t_lo = self.shifted(g)
        rho = self.rho
        val = self.sigma * f + float(self.lam @ c_eq) + 0.5 * rho * float(c_eq @ c_eq)
        val += float((t_hi**2 - self.mu_hi**2).sum() + (t_lo**2 - self.mu_lo**2).sum()) / (2.0 * rho)
        return val

    def merit_grad(self, y):
        """Merit gradient, the combined multiplier vector and the active-row weights."""
        f, g, df, J = self.evaluate(self.D * y)
        _, t_eq, t_hi, t_lo = self.shifted(g)
        t = t_eq + t_hi - t_lo
        grad = self.D * (self.sigma * df + J.T @ (self.S * t))
        active = self.eq | (t_hi > 0) | (t_lo > 0)
        return grad, t, active

    def gauss_newton(self, y, active):
        J = self.evaluate(self.D * y)[3]
        wts = np.where(active, self.S, 0.0)
        JS = sp.diags(wts) @ J @ sp.diags(self.D)
        return self.rho * (JS.T @ JS)

    def update_multipliers(self, g):
        _, t_eq, t_hi, t_lo = self.shifted(g)
        self.lam, self.mu_hi, self.mu_lo = t_eq, t_hi, t_lo

    def lagrangian_gradient(self, w):
        f, g, df, J = self.evaluate(w)
        grad_w = self.sigma * df + J.T @ (self.S * (self.lam + self.mu_hi - self.mu_lo))
        return self.D * grad_w


def _block_hessian(al, y, t, groups):
    """Curvature of ``sigma f + t^T S c`` at fixed ``t`` over independent index groups.

    Every group's gradient entries depend nonlinearly on that group only, so
    perturbing slot ``j`` of all groups at once yields column ``j`` of every
    block from one extra Jacobian. Blocks are symmetrized and projected onto
    the positive semidefinite cone.
    """
    def lag_grad(yy):
        _, _, df, J = al.evaluate(al.D * yy)
        return al.D * (al.sigma * df + J.T @ (al.S * t))

    g0 = lag_grad(y)
    width = max(g.shape[1] for g in groups)
    blocks = [np.zeros((g.shape[0], g.shape[1], g.shape[1])) for g in groups]
    for j in range(width):
        e = np.zeros_like(y)
        for g in groups:
            if j < g.shape[1]:
                idx = g[:, j]
                e[idx] = 1e-7 * np.maximum(1.0, np.abs(y[idx]))
        step = (y + e) - y
        dg = lag_grad(y + e) - g0
        for g, B in zip(groups, blocks):
            if j < g.shape[1]:
                B[:, :, j] = dg[g] / step[g[:, j]][:, None]
    rows, cols, data = [], [], []
    for g, B in zip(groups, blocks):
        B = 0.5 * (B + B.transpose(0, 2, 1))
        # drop negative curvature: the concave part of the turn-rate cost
        # would otherwise force a large uniform shift on the whole system
        lam, V = np.linalg.eigh(B)
        B = np.einsum("nij,nj,nkj->nik", V, np.maximum(lam, 0.0), V)
        b = g.shape[1]
        rows.append(np.repeat(g, b, axis=1).ravel())
        cols.append(np.tile(g, (1, b)).ravel())
        data.append(B.ravel())
    n = y.size
    return sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


class _ShiftedCholesky:
    """Solve ``(H + tau I) d = -g`` with the smallest tau (from a geometric ladder) giving a PD matrix.

    The matrix is factored in LAPACK banded form; multiple shooting keeps the
    bandwidth at a couple of node strides.
    """

    def __init__(self):
        self.tau_last = 0.0

    def solve(self, H, rhs):
        H = sp.coo_matrix(H)
        n = H.shape[0]
        if n == 0:
            return np.zeros(0), 0.0
        upper = H.row <= H.col
        r, c, v = H.row[upper], H.col[upper], H.data[upper]
        bw = int((c - r).max()) if r.size else 0
        ab = np.zeros((bw + 1, n))
        np.add.at(ab, (bw + r - c, c), v)
        diag_scale = max(1.0, float(np.abs(ab[bw]).max()))
        tau = 0.0
        tries = 0
        while True:
            shifted = ab.copy()
            shifted[bw] += tau
            try:
                factor = la.cholesky_banded(shifted, lower=False)
                d = la.cho_solve_banded((factor, False), rhs)
                if np.isfinite(d).all():
                    break
            except la.LinAlgError:
                pass
            tries += 1
            if tries > 60:
                raise la.LinAlgError("could not regularize the Newton matrix")
            if tau == 0.0:
                tau = max(1e-12 * diag_scale, self.tau_last / 3.0) if self.tau_last else 1e-8 * diag_scale
            else:
                tau *= 8.0 if self.tau_last else 100.0
        self.tau_last = tau
        return d, tau


def _inner(al, y, lb, ub, tol, max_iter, groups, newton, pinned, on_step):
    """Projected Newton-type minimization of the merit over the box; returns (y, iterations)."""
    merit = al.merit(y)
    grad, t, active = al.merit_grad(y)
    nit = 0
    while nit < max_iter:
        pg = projected_gradient_norm(y, grad, lb, ub)
        if pg <= tol:
            break
        eps = min(1e-3, pg)
        fixed = pinned | ((y - lb <= eps) & (grad > 0)) | ((ub - y <= eps) & (grad < 0))
        free = np.flatnonzero(~fixed)
        H = al.gauss_newton(y, active) + _block_hessian(al, y, t, groups)
        H_free = H.tocsc()[free][:, free]
        d = np.zeros_like(y)
        tau = np.nan
        try:
            d[free], tau = newton.solve(H_free, -grad[free])
        except la.LinAlgError:
            d[free] = -grad[free] / np.maximum(np.abs(H_free.diagonal()), 1e-12)
        if float(grad @ d) >= 0:
            d = np.zeros_like(y)
            d[free] = -grad[free]

        alpha = 1.0
        accepted = False
        for _ in range(40):
            y_new = np.clip(y + alpha * d, lb, ub)
            try:
                m_new = al.merit(y_new)
            except _EvaluationError:
                m_new = np.inf
            if m_new <= merit + 1e-4 * float(grad @ (y_new - y)):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        if log.isEnabledFor(logging.DEBUG):
            clipped = int(((y + alpha * d < lb) | (y + alpha * d > ub)).sum())
            pred = float(grad @ d) + 0.5 * float(d @ (H @ d))
            log.debug("  inner %d: pg=%.3g alpha=%.3g merit=%.10g free=%d clipped=%d dm=%.3g pred=%.3g tau=%.3g",
                      nit, pg, alpha, m_new, free.size, clipped, m_new - merit, pred, tau)
        nit += 1
        s = y_new - y
        y, merit = y_new, m_new
        grad, t, active = al.merit_grad(y)
        on_step(y, merit, float(np.abs(s).max()))
    return y, nit


def solve(problem, w0, cfg: SolverConfig = SolverConfig()) -> NlpSolution:
    """Locally solve ``min cost(w)`` s.t. ``g_lb <= g(w) <= g_ub``, ``w_lb <= w <= w_ub``."""
    t_start = time.perf_counter()
    w_lb = np.asarray(problem.w_lb, dtype=float)
    w_ub = np.asarray(problem.w_ub, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != w_lb.shape:
        raise ValueError(f"initial guess has length {w0.size}, expected {w_lb.size}")
    w0 = np.clip(w0, w_lb, w_ub)

    if hasattr(problem, "scaling"):
        D, S, sigma = problem.scaling(w0)
    else:
        D = np.ones_like(w0)
        S = np.ones(np.asarray(problem.g_lb).size)
        sigma = 1.0
    if hasattr(problem, "hessian_blocks"):
        groups = problem.hessian_blocks()
    else:
        groups = [np.arange(w0.size)[None, :]]
    al = _AugLag(problem, D, S, sigma)
    al.rho = cfg.initial_penalty
    newton = _ShiftedCholesky()
    y_lb, y_ub = w_lb / D, w_ub / D
    pinned = y_lb == y_ub
    y = w0 / D
    trace = []
    status = Status.ITERATION_LIMIT
    inner_total = 0
    outer = 0
    prev_viol = np.inf
    omega = 1e-1

    def violation(w):
        _, g = al.values(w)
        return constraint_violation(g, al.g_lb, al.g_ub)

    try:
        for outer in range(1, cfg.max_outer_iterations + 1):
            counter = [0]

            def on_step(y_acc, merit, step):
                counter[0] += 1
                if cfg.trace:
                    e_r, i_r = violation(D * y_acc)
                    trace.append((outer, counter[0], merit, e_r, i_r, step, al.rho))

            y, nit = _inner(
                al, y, y_lb, y_ub, max(omega, cfg.kkt_tolerance), cfg.max_inner_iterations,
                groups, newton, pinned, on_step,
            )
            inner_total += nit
            w = D * y
            _, g = al.values(w)
            eq_res, in_res = constraint_violation(g, al.g_lb, al.g_ub)
            viol = max(eq_res, in_res)
            al.update_multipliers(g)
            kkt = projected_gradient_norm(y, al.lagrangian_gradient(w), y_lb, y_ub)
            log.debug(
                "outer %d: inner %d, f=%.8g, eq=%.3g, ineq=%.3g, kkt=%.3g, rho=%.3g",
                outer, nit, problem.cost(w), eq_res, in_res, kkt, al.rho,
            )
            if viol <= cfg.constraint_tolerance and kkt <= cfg.kkt_tolerance:
                status = Status.CONVERGED
                break
            if viol > 0.25 * prev_viol and viol > cfg.constraint_tolerance:
                al.rho = min(al.rho * cfg.penalty_growth, cfg.max_penalty)
            prev_viol = viol
            omega = max(0.1 * omega, cfg.kkt_tolerance)
    except _EvaluationError as exc:
        log.warning("evaluation failure: %s", exc)
        status = Status.EVALUATION_FAILURE

    w_star = D * y
    try:
        f, g = al.values(w_star)
        eq_res, in_res = constraint_violation(g, al.g_lb, al.g_ub)
        kkt = projected_gradient_norm(y, al.lagrangian_gradient(w_star), y_lb, y_ub)
    except _EvaluationError:
        f, eq_res, in_res, kkt = np.nan, np.inf, np.inf, np.inf
        status = Status.EVALUATION_FAILURE
    multipliers = al.S * (al.lam + al.mu_hi - al.mu_lo) / al.sigma
    return NlpSolution(
        w_star=w_star,
        objective=float(f),
        equality_residual=eq_res,
        obstacle_violation=in_res,
        kkt_residual=kkt,
        outer_iterations=outer,
        inner_iterations=inner_total,
        function_evaluations=al.n_eval,
        wall_time=time.perf_counter() - t_start,
        status=status,
        multipliers=multipliers,
        trace=trace,
    )
