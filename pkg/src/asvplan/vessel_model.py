"""3-DOF surface vessel model, running cost and the RK4 shooting map.

State ordering is ``[x, y, psi, u, v, r]`` (NED north/east position, heading,
surge, sway, yaw rate) and controls are ``[tau_X, tau_N]`` (surge force, yaw
moment). The augmented state appends the accumulated cost ``J``.

Every kernel is written on per-component arrays so the same code runs on plain
numpy arrays (batched over a leading axis) and on :class:`asvplan.dual.Dual`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from asvplan import dual

N_STATES = 6
N_AUG = 7
N_CONTROLS = 2


class State(NamedTuple):
    x: float
    y: float
    psi: float
    u: float
    v: float
    r: float


class Control(NamedTuple):
    tau_X: float
    tau_N: float


class AugmentedState(NamedTuple):
    state: State
    cost: float

    def as_array(self) -> np.ndarray:
        return np.append(np.asarray(self.state, dtype=float), self.cost)


@dataclass(frozen=True, eq=False)
class VesselParams:
    """Inertia, damping and bounds of the vessel.

    ``state_lb``/``state_ub`` follow the state ordering; position entries may be
    infinite (the scenario intersects them with the map bounds).
    """

    mass_matrix: np.ndarray
    damping_linear: np.ndarray
    damping_quadratic: np.ndarray
    control_lb: np.ndarray
    control_ub: np.ndarray
    state_lb: np.ndarray
    state_ub: np.ndarray
    r_max: float
    min_turn_radius: float
    mass_inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        def arr(name, shape):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            return a

        M = arr("mass_matrix", (3, 3))
        dl = arr("damping_linear", (3,))
        dq = arr("damping_quadratic", (3,))
        clb, cub = arr("control_lb", (2,)), arr("control_ub", (2,))
        slb, sub = arr("state_lb", (6,)), arr("state_ub", (6,))
        if not np.allclose(M, M.T, rtol=0, atol=1e-12 * np.abs(M).max()):
            raise ValueError("mass matrix must be symmetric")
        if np.linalg.eigvalsh(M).min() <= 0:
            raise ValueError("mass matrix must be positive definite")
        if (dl < 0).any() or (dq < 0).any():
            raise ValueError("damping coefficients must be nonnegative")
        if (clb > cub).any() or (slb > sub).any():
            raise ValueError("lower bounds must not exceed upper bounds")
        if not self.r_max > 0 or not self.min_turn_radius > 0:
            raise ValueError("r_max and min_turn_radius must be positive")
        Minv = np.linalg.inv(M)
        Minv.setflags(write=False)
        object.__setattr__(self, "mass_inverse", Minv)

    def coriolis(self, nu) -> np.ndarray:
        """C(nu) built from M so that C is skew-symmetric."""
        u, v, r = (float(c) for c in nu)
        a1, a2 = self.mass_matrix[:2] @ np.array([u, v, r])
        return np.array([[0.0, 0.0, -a2], [0.0, 0.0, a1], [a2, -a1, 0.0]])

    def damping(self, nu) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        return np.diag(self.damping_linear + self.damping_quadratic * np.abs(nu))


def default_params() -> VesselParams:
    """Representative small planing-hull craft (about 8 m, 4 t).

    Diagonal inertia including added mass, linear plus quadratic damping. Surge
    settles at 3 m/s under 3 kN of thrust.
    """
    r_max = np.deg2rad(40.0)
    return VesselParams(
        mass_matrix=np.diag([4500.0, 7000.0, 25000.0]),
        damping_linear=np.array([100.0, 4000.0, 10000.0]),
        damping_quadratic=np.array([300.0, 2000.0, 5000.0]),
        control_lb=np.array([-2000.0, -10000.0]),
        control_ub=np.array([8000.0, 10000.0]),
        state_lb=np.array([-np.inf, -np.inf, -4 * np.pi, 0.0, -2.0, -r_max]),
        state_ub=np.array([np.inf, np.inf, 4 * np.pi, 5.0, 2.0, r_max]),
        r_max=r_max,
        min_turn_radius=24.5,
    )


@dataclass(frozen=True)
class CostWeights:
    K_e: float = 3.5e-4
    K_t: float = 800.0
    a_t: float = 112.0
    b_t: float = 6.25e-5
    abs_smoothing: float = 1e-3

    def __post_init__(self):
        for name in ("K_e", "K_t", "a_t", "b_t", "abs_smoothing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def rotation(psi: float) -> np.ndarray:
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def smooth_abs(s, delta):
    return dual.sqrt(s * s + delta * delta) - delta


def turn_shape(a_t, b_t, r):
    return a_t * r * r + (1.0 - dual.exp(-(r * r) / b_t))


def turn_cost(weights: CostWeights, params: VesselParams, r):
    """Normalized turn-rate penalty; equals 1 at |r| = r_max."""
    f_max = turn_shape(weights.a_t, weights.b_t, params.r_max)
    return turn_shape(weights.a_t, weights.b_t, r) / f_max


def energy_rate(u, r, tau_X, tau_N, delta=0.0):
    """Actuator power |u tau_X| + |r tau_N| (smoothed when delta > 0)."""
    if delta > 0:
        return smooth_abs(u * tau_X, delta) + smooth_abs(r * tau_N, delta)
    return dual.absolute(u * tau_X) + dual.absolute(r * tau_N)


def _running_cost(weights, params, u, r, tau_X, tau_N):
    return weights.K_e * energy_rate(u, r, tau_X, tau_N, weights.abs_smoothing) + (
        weights.K_t * turn_cost(weights, params, r)
    )


def _rhs(params, psi, u, v, r, tau_X, tau_N):
    M = params.mass_matrix
    Minv = params.mass_inverse
    dl, dq = params.damping_linear, params.damping_quadratic
    c, s = dual.cos(psi), dual.sin(psi)
    a1 = M[0, 0] * u + M[0, 1] * v + M[0, 2] * r
    a2 = M[1, 0] * u + M[1, 1] * v + M[1, 2] * r
    # -C(nu) nu - D(nu) nu + tau
    f0 = a2 * r - (dl[0] + dq[0] * dual.absolute(u)) * u + tau_X
    f1 = -a1 * r - (dl[1] + dq[1] * dual.absolute(v)) * v
    f2 = -(a2 * u - a1 * v) - (dl[2] + dq[2] * dual.absolute(r)) * r + tau_N
    return [
        c * u - s * v,
        s * u + c * v,
        r,
        Minv[0, 0] * f0 + Minv[0, 1] * f1 + Minv[0, 2] * f2,
        Minv[1, 0] * f0 + Minv[1, 1] * f1 + Minv[1, 2] * f2,
        Minv[2, 0] * f0 + Minv[2, 1] * f1 + Minv[2, 2] * f2,
    ]


def dynamics(params: VesselParams, x, u) -> np.ndarray:
    """State derivative f(x, u); accepts batched ``(..., 6)`` / ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    out = _rhs(params, x[..., 2], x[..., 3], x[..., 4], x[..., 5], u[..., 0], u[..., 1])
    return np.stack(np.broadcast_arrays(*out), axis=-1)


def cost_to_go(weights: CostWeights, params: VesselParams, x, u):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return _running_cost(weights, params, x[..., 3], x[..., 5], u[..., 0], u[..., 1])


def augmented_rhs(params, weights, z, ctrl):
    """Right-hand side of the 7-state ODE on component lists (dual-capable)."""
    _, _, psi, u, v, r, _ = z
    tau_X, tau_N = ctrl
    return _rhs(params, psi, u, v, r, tau_X, tau_N) + [
        _running_cost(weights, params, u, r, tau_X, tau_N)
    ]


def rk4_components(params, weights, z, ctrl, h, substeps=1):
    """Classical RK4 over ``[0, h]`` with ``substeps`` equal steps, controls held."""
    dt = h / substeps
    for _ in range(substeps):
        k1 = augmented_rhs(params, weights, z, ctrl)
        k2 = augmented_rhs(params, weights, [a + 0.5 * dt * b for a, b in zip(z, k1)], ctrl)
        k3 = augmented_rhs(params, weights, [a + 0.5 * dt * b for a, b in zip(z, k2)], ctrl)
        k4 = augmented_rhs(params, weights, [a + dt * b for a, b in zip(z, k3)], ctrl)
        z = [
            a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(z, k1, k2, k3, k4)
        ]
    return z


def shooting_map(params, weights, z, u, h: float, substeps: int = 1) -> np.ndarray:
    """Discrete map z_{k+1} = F(z_k, u_k) on ``(..., 7)`` augmented states."""
    if not h > 0 or substeps < 1:
        raise ValueError("need h > 0 and substeps >= 1")
    if isinstance(z, AugmentedState):
        z = z.as_array()
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    comps = [z[..., i] for i in range(N_AUG)]
    ctrl = [u[..., 0], u[..., 1]]
    out = rk4_components(params, weights, comps, ctrl, h, substeps)
    return np.stack(np.broadcast_arrays(*out), axis=-1)


def steady_state_thrust(params: VesselParams, u_nom: float) -> float:
    """Surge force holding ``u_nom`` with v = r = 0."""
    # with v = r = 0 the Coriolis surge term vanishes and only diagonal damping remains
    dl, dq = params.damping_linear[0], params.damping_quadratic[0]
    return float(dl * u_nom + dq * abs(u_nom) * u_nom)


def cost_split(params, weights, z, u, h: float, substeps: int = 1):
    """Unweighted energy and turn integrals over one shooting interval.

    Uses the RK4 stages of :func:`shooting_map`, so ``K_e * e + K_t * t`` equals
    the cost increment of the augmented map up to rounding.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    x = [z[..., i] for i in range(6)]
    tX, tN = u[..., 0], u[..., 1]
    dt = h / substeps
    e_sum = 0.0
    t_sum = 0.0

    def integrands(s):
        e = energy_rate(s[3], s[5], tX, tN, weights.abs_smoothing)
        return e, turn_cost(weights, params, s[5])

    for _ in range(substeps):
        k1 = _rhs(params, *x[2:], tX, tN)
        s2 = [a + 0.5 * dt * b for a, b in zip(x, k1)]
        k2 = _rhs(params, *s2[2:], tX, tN)
        s3 = [a + 0.5 * dt * b for a, b in zip(x, k2)]
        k3 = _rhs(params, *s3[2:], tX, tN)
        s4 = [a + dt * b for a, b in zip(x, k3)]
        k4 = _rhs(params, *s4[2:], tX, tN)
        stages = [integrands(s) for s in (x, s2, s3, s4)]
        e_sum = e_sum + (dt / 6.0) * (stages[0][0] + 2 * stages[1][0] + 2 * stages[2][0] + stages[3][0])
        t_sum = t_sum + (dt / 6.0) * (stages[0][1] + 2 * stages[1][1] + 2 * stages[2][1] + stages[3][1])
        x = [a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)]
    return np.asarray(e_sum, dtype=float), np.asarray(t_sum, dtype=float)
