"""Time-parametrized warm-start trajectory built from the smoothed path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from asvplan import layout
from asvplan.errors import InfeasibleSpeed
from asvplan.path_smoother import GeomPath, eval_path
from asvplan.vessel_model import (
    CostWeights,
    VesselParams,
    dynamics,
    energy_rate,
    steady_state_thrust,
    turn_cost,
)


def _integrands(weights, params, X, U):
    e = energy_rate(X[:, 3], X[:, 5], U[:, 0], U[:, 1], weights.abs_smoothing)
    return np.asarray(e, dtype=float), np.asarray(turn_cost(weights, params, X[:, 5]), dtype=float)


@dataclass(frozen=True, eq=False)
class WarmTrajectory:
    t_max: float
    u_nom: float
    t: np.ndarray
    states: np.ndarray  # (n, 6)
    controls: np.ndarray  # (n, 2)
    J: np.ndarray  # (n,)
    J_e: np.ndarray  # unweighted energy integral
    J_t: np.ndarray  # unweighted turn integral

    def dynamic_residual(self, params: VesselParams) -> float:
        """max |dx/dt - f(x, u)| using centred differences of the samples.

        The lifted trajectory is not expected to satisfy the dynamics; this is a
        diagnostic only.
        """
        xdot = np.gradient(self.states, self.t, axis=0)
        return float(np.abs(xdot - dynamics(params, self.states, self.controls)).max())

    def to_csv(self) -> str:
        lines = ["t,x,y,psi,u,v,r,tau_X,tau_N,J,J_e,J_t"]
        data = np.column_stack([self.t, self.states, self.controls, self.J, self.J_e, self.J_t])
        for row in data:
            lines.append(",".join(f"{v:.12g}" for v in row))
        return "\n".join(lines) + "\n"


def _breakpoint_times(g: GeomPath, u_nom: float) -> np.ndarray:
    if u_nom <= 0:
        return np.array([])
    return np.asarray(g.offsets[1:-1]) / u_nom


def lift(
    g: GeomPath,
    t_max: float,
    params: VesselParams,
    weights: CostWeights,
    samples: int,
) -> WarmTrajectory:
    """Constant-surge trajectory along ``g`` taking ``t_max`` seconds."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    u_nom = g.total_length / t_max
    u_ub = params.state_ub[3]
    if u_nom > u_ub:
        raise InfeasibleSpeed(f"nominal speed {u_nom:.3f} m/s exceeds the surge bound {u_ub} m/s")
    tau_ss = steady_state_thrust(params, u_nom)

    def channels(t):
        pos, gam, rate = eval_path(g, np.minimum(u_nom * t, g.total_length), u_nom)
        n = t.size
        X = np.column_stack([pos, gam, np.full(n, u_nom), np.zeros(n), rate])
        U = np.column_stack([np.full(n, tau_ss), np.zeros(n)])
        return X, U

    t = np.linspace(0.0, t_max, samples)
    states, controls = channels(t)

    # the integrand is piecewise constant between path joints, so the midpoint
    # rule on the joint-refined grid integrates it exactly
    fine = np.union1d(t, _breakpoint_times(g, u_nom))
    mid = 0.5 * (fine[1:] + fine[:-1])
    e, tr = _integrands(weights, params, *channels(mid))
    at = np.searchsorted(fine, t)
    J_e = np.concatenate(([0.0], np.cumsum(e * np.diff(fine))))[at]
    J_t = np.concatenate(([0.0], np.cumsum(tr * np.diff(fine))))[at]
    J = weights.K_e * J_e + weights.K_t * J_t
    return WarmTrajectory(float(t_max), float(u_nom), t, states, controls, J, J_e, J_t)


def straight_line(start, goal, t_max, params, weights, samples) -> WarmTrajectory:
    """Constant-speed straight run start->goal (degenerate when start == goal)."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    delta = goal - start
    dist = float(np.hypot(*delta))
    t = np.linspace(0.0, t_max, samples)
    if dist == 0.0:
        n = t.size
        states = np.column_stack([np.tile(start, (n, 1)), np.zeros((n, 4))])
        controls = np.zeros((n, 2))
        return WarmTrajectory(float(t_max), 0.0, t, states, controls, np.zeros(n), np.zeros(n), np.zeros(n))
    u_nom = dist / t_max
    tau_ss = steady_state_thrust(params, u_nom)
    gamma = float(np.arctan2(delta[1], delta[0]))
    frac = t / t_max
    n = t.size
    states = np.column_stack(
        [start[0] + frac * delta[0], start[1] + frac * delta[1], np.full(n, gamma), np.full(n, u_nom), np.zeros(n), np.zeros(n)]
    )
    controls = np.column_stack([np.full(n, tau_ss), np.zeros(n)])
    e, tr = _integrands(weights, params, states, controls)
    J_e, J_t = e * t, tr * t
    J = weights.K_e * J_e + weights.K_t * J_t
    return WarmTrajectory(float(t_max), float(u_nom), t, states, controls, J, J_e, J_t)


def sample_to_grid(w: WarmTrajectory, n_ocp: int) -> np.ndarray:
    """Interpolate every channel onto ``t_k = k t_max / n_ocp`` and pack."""
    if n_ocp < 1:
        raise ValueError("n_ocp must be >= 1")
    tk = np.linspace(0.0, w.t_max, n_ocp + 1)
    Z = np.column_stack(
        [np.interp(tk, w.t, w.states[:, i]) for i in range(6)] + [np.interp(tk, w.t, w.J)]
    )
    U = np.column_stack([np.interp(tk[:-1], w.t, w.controls[:, i]) for i in range(2)])
    return layout.pack(Z, U)
