"""End-to-end runs: A* -> smoothing/lifting -> optimal control, plus output files."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from asvplan import layout
from asvplan.astar import Grid, GridPath, astar_search, build_grid
from asvplan.path_smoother import GeomPath, WaypointPath, connect_waypoints, path_to_csv, reduce_waypoints
from asvplan.scenario import Scenario
from asvplan.solver import NlpSolution, solve
from asvplan.transcription import transcribe
from asvplan.vessel_model import cost_split
from asvplan.warmstart import WarmTrajectory, lift, sample_to_grid, straight_line


class Mode(str, enum.Enum):
    WARM = "warm"
    COLD = "cold"
    GUESS = "guess"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Node-sampled trajectory; ``controls[k]`` acts on ``[t_k, t_{k+1})``."""

    t: np.ndarray  # (N+1,)
    states: np.ndarray  # (N+1, 6)
    controls: np.ndarray  # (N, 2)
    J_e: np.ndarray  # (N+1,) unweighted energy
    J_t: np.ndarray  # (N+1,) unweighted turn term
    K_e: float
    K_t: float

    @property
    def J(self) -> np.ndarray:
        return self.K_e * self.J_e + self.K_t * self.J_t


@dataclass
class RunResult:
    scenario: Scenario
    mode: Mode
    trajectory: Trajectory
    timings: dict
    feasible: bool
    solution: Optional[NlpSolution] = None
    grid: Optional[Grid] = None
    grid_path: Optional[GridPath] = None
    waypoints: Optional[WaypointPath] = None
    geom: Optional[GeomPath] = None
    guess: Optional[WarmTrajectory] = None
    guess_cost: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def J(self) -> float:
        return float(self.trajectory.J[-1])

    @property
    def J_e(self) -> float:
        return float(self.trajectory.J_e[-1])

    @property
    def iterations(self) -> int:
        return self.solution.inner_iterations if self.solution is not None else 0

    def metrics(self) -> dict:
        out = {
            "scenario": self.scenario.name,
            "mode": self.mode.value,
            "n_ocp": self.scenario.N_ocp,
            "feasible": self.feasible,
            "J": self.J,
            "J_e": self.J_e,
            "timings": dict(self.timings),
            "iterations": self.iterations,
        }
        if self.guess_cost is not None:
            out["guess_cost"] = self.guess_cost
        if self.solution is not None:
            s = self.solution
            out["solver"] = {
                "status": s.status.value,
                "objective": s.objective,
                "outer_iterations": s.outer_iterations,
                "inner_iterations": s.inner_iterations,
                "function_evaluations": s.function_evaluations,
                "equality_residual": s.equality_residual,
                "obstacle_violation": s.obstacle_violation,
                "kkt_residual": s.kkt_residual,
                "wall_time": s.wall_time,
            }
        if self.waypoints is not None:
            out["waypoints"] = [list(p) for p in self.waypoints.waypoints]
        if self.geom is not None:
            out["path_length"] = self.geom.total_length
        return out


def _samples(s: Scenario) -> int:
    return 10 * s.N_ocp + 1


def cold_start_guess(s: Scenario) -> np.ndarray:
    """Straight start->goal run at constant speed, ignoring obstacles."""
    tr = straight_line(s.start[:2], s.goal, s.t_max, s.params, s.weights, _samples(s))
    return sample_to_grid(tr, s.N_ocp)


def _problem(s: Scenario):
    return transcribe(
        s.start, s.goal, s.t_max, s.params, s.weights, s.obstacles, s.N_ocp, s.K_ocp, s.map_bounds
    )


def _from_decision(s: Scenario, w: np.ndarray) -> Trajectory:
    Z, U = layout.unpack(w)
    h = s.t_max / s.N_ocp
    e, tt = cost_split(s.params, s.weights, Z[:-1], U, h, s.K_ocp)
    J_e = np.concatenate(([0.0], np.cumsum(e)))
    J_t = np.concatenate(([0.0], np.cumsum(tt)))
    t = np.linspace(0.0, s.t_max, s.N_ocp + 1)
    return Trajectory(t, Z[:, :6].copy(), U, J_e, J_t, s.weights.K_e, s.weights.K_t)


def _from_guess(s: Scenario, tr: WarmTrajectory) -> Trajectory:
    Z, U = layout.unpack(sample_to_grid(tr, s.N_ocp))
    tk = np.linspace(0.0, s.t_max, s.N_ocp + 1)
    J_e = np.interp(tk, tr.t, tr.J_e)
    J_t = np.interp(tk, tr.t, tr.J_t)
    return Trajectory(tk, Z[:, :6].copy(), U, J_e, J_t, s.weights.K_e, s.weights.K_t)


def plan_path(s: Scenario):
    """Steps 1 and 2: grid search, waypoint reduction, arc connection, lifting."""
    timings = {}
    t0 = time.perf_counter()
    grid = build_grid(s.obstacles, s.map_bounds, s.delta_d)
    raw = astar_search(grid, s.obstacles, s.start[:2], s.goal)
    t1 = time.perf_counter()
    wp = reduce_waypoints(raw, s.obstacles)
    geom = connect_waypoints(wp, s.R_acc, s.R_turn_min)
    guess = lift(geom, s.t_max, s.params, s.weights, _samples(s))
    t2 = time.perf_counter()
    timings["step1"] = t1 - t0
    timings["step2"] = t2 - t1
    return grid, raw, wp, geom, guess, timings


def run_pipeline(s: Scenario, mode) -> RunResult:
    mode = Mode(mode)
    if mode is Mode.COLD:
        t0 = time.perf_counter()
        prob = _problem(s)
        w0 = cold_start_guess(s)
        sol = solve(prob, w0, s.solver)
        timings = {"step3": time.perf_counter() - t0}
        timings["total"] = timings["step3"]
        return RunResult(s, mode, _from_decision(s, sol.w_star), timings, sol.converged, solution=sol,
                         guess_cost=float(w0[-1]))

    grid, raw, wp, geom, guess, timings = plan_path(s)
    common = dict(grid=grid, grid_path=raw, waypoints=wp, geom=geom, guess=guess, guess_cost=float(guess.J[-1]))
    if mode is Mode.GUESS:
        timings["total"] = timings["step1"] + timings["step2"]
        return RunResult(s, mode, _from_guess(s, guess), timings, False, **common)

    t0 = time.perf_counter()
    prob = _problem(s)
    sol = solve(prob, sample_to_grid(guess, s.N_ocp), s.solver)
    timings["step3"] = time.perf_counter() - t0
    timings["total"] = timings["step1"] + timings["step2"] + timings["step3"]
    return RunResult(s, mode, _from_decision(s, sol.w_star), timings, sol.converged, solution=sol, **common)


def _wrap(a):
    return np.arctan2(np.sin(a), np.cos(a))


def trajectory_csv(tr: Trajectory) -> str:
    n = tr.t.size
    # zero-order hold: the final row repeats the last control
    U = np.vstack([tr.controls, tr.controls[-1:]]) if tr.controls.size else np.zeros((n, 2))
    X = tr.states
    lines = ["t,x,y,psi_wrapped,psi,u,v,r,tau_X,tau_N,J"]
    data = np.column_stack([tr.t, X[:, 0], X[:, 1], _wrap(X[:, 2]), X[:, 2], X[:, 3:], U, tr.J])
    for row in data:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def cost_csv(tr: Trajectory) -> str:
    lines = ["t,J_total,K_e_J_e,K_t_J_t"]
    for t, a, b in zip(tr.t.tolist(), (tr.K_e * tr.J_e).tolist(), (tr.K_t * tr.J_t).tolist()):
        lines.append(f"{t!r},{a + b!r},{a!r},{b!r}")
    return "\n".join(lines) + "\n"


def emit_outputs(result: RunResult, out_dir, trace: bool = False, dump_grid: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "trajectory.csv": trajectory_csv(result.trajectory),
        "cost.csv": cost_csv(result.trajectory),
        "metrics.json": json.dumps(result.metrics(), indent=2, sort_keys=True) + "\n",
    }
    if trace and result.solution is not None:
        files["solver_trace.csv"] = result.solution.trace_csv()
    if dump_grid and result.grid is not None:
        files["grid.csv"] = result.grid.to_csv()
        pts = result.grid_path.points
        files["astar_path.csv"] = "x,y\n" + "".join(f"{x!r},{y!r}\n" for x, y in pts)
        files["waypoints.csv"] = "x,y\n" + "".join(f"{x!r},{y!r}\n" for x, y in result.waypoints.waypoints)
        files["geom_path.csv"] = path_to_csv(result.geom, result.guess.u_nom)
        files["guess.csv"] = result.guess.to_csv()
    written = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        written.append(p)
    return written


def route_length(tr: Trajectory) -> float:
    d = np.diff(tr.states[:, :2], axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())

