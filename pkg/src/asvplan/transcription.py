"""Multiple-shooting transcription of the trajectory OCP into an NLP.

Constraints are stacked shooting rows first (``z_{k+1} - F(z_k, u_k) = 0``,
seven per interval) and obstacle rows second (``g_o <= 0`` for every obstacle at
every node ``k = 0..N``, time-major). First derivatives come from forward-mode
dual numbers pushed through the same RK4 code that evaluates the constraints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from asvplan import dual, layout
from asvplan.obstacles import ObstacleSet, g_o
from asvplan.vessel_model import CostWeights, VesselParams, rk4_components, shooting_map

NZ, NU, STRIDE = layout.NZ, layout.NU, layout.STRIDE


@dataclass(frozen=True, eq=False)
class NlpProblem:
    n_ocp: int
    k_ocp: int
    t_max: float
    params: VesselParams
    weights: CostWeights
    obstacles: ObstacleSet
    w_lb: np.ndarray
    w_ub: np.ndarray
    jac_rows: np.ndarray = field(init=False, repr=False)
    jac_cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.w_lb.shape != (self.n_w,) or self.w_ub.shape != (self.n_w,):
            raise ValueError("bound vectors do not match the decision layout")
        if (self.w_lb > self.w_ub).any():
            bad = int(np.flatnonzero(self.w_lb > self.w_ub)[0])
            raise ValueError(f"inconsistent bounds at decision index {bad}")
        rows, cols = self._pattern()
        object.__setattr__(self, "jac_rows", rows)
        object.__setattr__(self, "jac_cols", cols)

    @property
    def h(self) -> float:
        return self.t_max / self.n_ocp

    @property
    def n_w(self) -> int:
        return layout.n_decision(self.n_ocp)

    @property
    def n_obs(self) -> int:
        return len(self.obstacles)

    @property
    def n_shooting(self) -> int:
        return NZ * self.n_ocp

    @property
    def n_obstacle_rows(self) -> int:
        return self.n_obs * (self.n_ocp + 1)

    @property
    def n_g(self) -> int:
        return self.n_shooting + self.n_obstacle_rows

    @property
    def g_lb(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.n_shooting), np.full(self.n_obstacle_rows, -np.inf)])

    @property
    def g_ub(self) -> np.ndarray:
        return np.zeros(self.n_g)

    # -- sparsity -----------------------------------------------------------
    def _pattern(self):
        N, No = self.n_ocp, self.n_obs
        k = np.arange(N)
        # dense 7x9 block on [z_k, u_k] then the identity on z_{k+1}
        r_blk = (NZ * k)[:, None, None] + np.arange(NZ)[None, :, None]
        c_blk = (STRIDE * k)[:, None, None] + np.arange(STRIDE)[None, None, :]
        r_blk, c_blk = np.broadcast_arrays(r_blk, c_blk)
        r_id = (NZ * k)[:, None] + np.arange(NZ)[None, :]
        c_id = (STRIDE * (k + 1))[:, None] + np.arange(NZ)[None, :]
        kk = np.arange(N + 1)
        r_ob = self.n_shooting + (No * kk)[:, None, None] + np.arange(No)[None, :, None] + np.zeros((1, 1, 2), int)
        c_ob = (STRIDE * kk)[:, None, None] + np.zeros((1, No, 1), int) + np.arange(2)[None, None, :]
        rows = np.concatenate([r_blk.ravel(), r_id.ravel(), r_ob.ravel()])
        cols = np.concatenate([c_blk.ravel(), c_id.ravel(), c_ob.ravel()])
        return rows, cols

    # -- evaluations --------------------------------------------------------
    def cost(self, w: np.ndarray) -> float:
        return float(w[-1])

    def cost_gradient(self, w: np.ndarray) -> np.ndarray:
        g = np.zeros(self.n_w)
        g[-1] = 1.0
        return g

    def constraints(self, w: np.ndarray) -> np.ndarray:
        Z, U = layout.unpack(np.asarray(w, dtype=float))
        F = shooting_map(self.params, self.weights, Z[:-1], U, self.h, self.k_ocp)
        gs = (Z[1:] - F).ravel()
        if not self.n_obs:
            return gs
        go = self.obstacles.g_values(Z[:, 0], Z[:, 1]).T.ravel()
        return np.concatenate([gs, go])

    def jacobian_values(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Constraint values and Jacobian nonzeros ordered like ``jac_rows``."""
        Z, U = layout.unpack(np.asarray(w, dtype=float))
        seeds = dual.Dual.seed(np.hstack([Z[:-1], U]))
        out = rk4_components(self.params, self.weights, seeds[:NZ], seeds[NZ:], self.h, self.k_ocp)
        F = np.stack([o.val for o in out], axis=-1)
        dF = np.stack([o.der for o in out], axis=1)  # (N, 7, 9)
        gs = (Z[1:] - F).ravel()
        vals = [(-dF).ravel(), np.ones(self.n_shooting)]
        if not self.n_obs:
            return gs, np.concatenate(vals)
        px, py = dual.Dual.seed(Z[:, :2])
        go_vals, go_ders = [], []
        for obs in self.obstacles.obstacles:
            d = g_o(obs, self.obstacles.epsilon, px, py)
            go_vals.append(d.val)
            go_ders.append(d.der)
        go = np.stack(go_vals, axis=1)  # (N+1, No)
        vals.append(np.stack(go_ders, axis=1).ravel())  # (N+1, No, 2)
        return np.concatenate([gs, go.ravel()]), np.concatenate(vals)

    def constraints_and_jacobian(self, w: np.ndarray) -> tuple[np.ndarray, sp.csr_matrix]:
        g, vals = self.jacobian_values(w)
        J = sp.csr_matrix((vals, (self.jac_rows, self.jac_cols)), shape=(self.n_g, self.n_w))
        return g, J

    def scaling(self, w0: np.ndarray):
        """Per-channel variable scales, matching shooting-row scales, objective scale."""
        j_step = max(1.0, abs(float(w0[-1])) / self.n_ocp)
        z_scale = np.array([10.0, 10.0, 1.0, 1.0, 1.0, 0.1, j_step])
        u_scale = np.maximum(1.0, 0.125 * (self.params.control_ub - self.params.control_lb))
        D = layout.pack(np.tile(z_scale, (self.n_ocp + 1, 1)), np.tile(u_scale, (self.n_ocp, 1)))
        S = np.concatenate([np.tile(1.0 / z_scale, self.n_ocp), np.ones(self.n_obstacle_rows)])
        return D, S, 1.0 / j_step

    def hessian_blocks(self) -> list[np.ndarray]:
        """Index groups [z_k, u_k] per interval plus the terminal node."""
        k = np.arange(self.n_ocp)
        inner = (STRIDE * k)[:, None] + np.arange(STRIDE)[None, :]
        last = (STRIDE * self.n_ocp + np.arange(NZ))[None, :]
        return [inner, last]

    def stats(self) -> dict:
        return {
            "n_ocp": self.n_ocp,
            "k_ocp": self.k_ocp,
            "h": self.h,
            "n_w": self.n_w,
            "n_g": self.n_g,
            "n_shooting_rows": self.n_shooting,
            "n_obstacle_rows": self.n_obstacle_rows,
            "n_obstacles": self.n_obs,
            "jacobian_nnz": int(self.jac_rows.size),
        }

    def stats_json(self) -> str:
        return json.dumps(self.stats(), indent=2, sort_keys=True)


def transcribe(
    start,
    goal,
    t_max: float,
    params: VesselParams,
    weights: CostWeights,
    obstacles: ObstacleSet,
    n_ocp: int,
    k_ocp: int = 1,
    position_bounds=None,
) -> NlpProblem:
    """Build the NLP for a transit ``start = (x_s, y_s, u_s)`` -> ``goal = (x_f, y_f)``.

    ``position_bounds = (x_min, x_max, y_min, y_max)`` tightens the vessel's
    position bounds (typically to the map).
    """
    if n_ocp < 1 or k_ocp < 1:
        raise ValueError("n_ocp and k_ocp must be >= 1")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    x_s, y_s, u_s = (float(v) for v in start)
    x_f, y_f = (float(v) for v in goal)
    s_lb = params.state_lb.copy()
    s_ub = params.state_ub.copy()
    if position_bounds is not None:
        x0, x1, y0, y1 = position_bounds
        s_lb[:2] = np.maximum(s_lb[:2], [x0, y0])
        s_ub[:2] = np.minimum(s_ub[:2], [x1, y1])
    psi_lb, psi_ub = s_lb[2], s_ub[2]
    for label, val, i in (("x_s", x_s, 0), ("y_s", y_s, 1), ("u_s", u_s, 3), ("x_f", x_f, 0), ("y_f", y_f, 1)):
        if not s_lb[i] <= val <= s_ub[i]:
            raise ValueError(f"boundary value {label}={val} outside [{s_lb[i]}, {s_ub[i]}]")

    z_lb = np.append(s_lb, 0.0)
    z_ub = np.append(s_ub, np.inf)
    zs_lb = np.array([x_s, y_s, psi_lb, u_s, 0.0, 0.0, 0.0])
    zs_ub = np.array([x_s, y_s, psi_ub, u_s, 0.0, 0.0, 0.0])
    zf_lb = np.array([x_f, y_f, psi_lb, s_lb[3], 0.0, 0.0, 0.0])
    zf_ub = np.array([x_f, y_f, psi_ub, s_ub[3], 0.0, 0.0, np.inf])

    Zl = np.tile(z_lb, (n_ocp + 1, 1))
    Zu = np.tile(z_ub, (n_ocp + 1, 1))
    Zl[0], Zu[0] = zs_lb, zs_ub
    Zl[-1], Zu[-1] = zf_lb, zf_ub
    Ul = np.tile(params.control_lb, (n_ocp, 1))
    Uu = np.tile(params.control_ub, (n_ocp, 1))
    return NlpProblem(
        n_ocp=int(n_ocp),
        k_ocp=int(k_ocp),
        t_max=float(t_max),
        params=params,
        weights=weights,
        obstacles=obstacles,
        w_lb=layout.pack(Zl, Ul),
        w_ub=layout.pack(Zu, Uu),
    )


def rollout(problem: NlpProblem, z0, U) -> np.ndarray:
    """Decision vector obtained by integrating ``z0`` forward under controls ``U``."""
    U = np.asarray(U, dtype=float)
    Z = np.empty((U.shape[0] + 1, NZ))
    Z[0] = z0
    for k in range(U.shape[0]):
        Z[k + 1] = shooting_map(problem.params, problem.weights, Z[k], U[k], problem.h, problem.k_ocp)
    return layout.pack(Z, U)
