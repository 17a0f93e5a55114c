"""Scenario files: one YAML document describing map, vessel, weights and solver settings.

Only ``map_bounds``, ``obstacles``, ``start``, ``goal`` and ``t_max`` are
required; everything else falls back to the library defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from asvplan.errors import ScenarioError
from asvplan.obstacles import EllipseObstacle, ObstacleSet, point_in_collision
from asvplan.solver import SolverConfig
from asvplan.vessel_model import CostWeights, VesselParams, default_params


@dataclass(frozen=True)
class Corridor:
    """Axis-aligned box around a passage running along y.

    The transit window is the part of a trajectory with ``y_min <= y <= y_max``;
    a route uses the passage when every such point also has ``x_min <= x <= x_max``.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ScenarioError("passage corridor must have positive extent")

    def route_uses(self, x, y) -> bool:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        window = (y >= self.y_min) & (y <= self.y_max)
        if not window.any():
            return False
        xs = x[window]
        return bool(((xs >= self.x_min) & (xs <= self.x_max)).all())


@dataclass(frozen=True, eq=False)
class Scenario:
    map_bounds: tuple[float, float, float, float]
    obstacles: ObstacleSet
    start: tuple[float, float, float]  # x_s, y_s, u_rs
    goal: tuple[float, float]
    t_max: float
    delta_d: float = 50.0
    N_ocp: int = 1000
    K_ocp: int = 1
    weights: CostWeights = field(default_factory=CostWeights)
    R_acc: float = 10.0
    R_turn_min: float = 24.5
    params: VesselParams = field(default_factory=default_params)
    solver: SolverConfig = field(default_factory=SolverConfig)
    passage: Optional[Corridor] = None
    name: str = "scenario"

    def __post_init__(self):
        x0, x1, y0, y1 = self.map_bounds
        if not (x1 > x0 and y1 > y0):
            raise ScenarioError("map_bounds must be (x_min, x_max, y_min, y_max) with positive extent")
        if not self.t_max > 0:
            raise ScenarioError("t_max must be positive")
        if not self.delta_d > 0:
            raise ScenarioError("delta_d must be positive")
        if self.N_ocp < 1 or self.K_ocp < 1:
            raise ScenarioError("N_ocp and K_ocp must be >= 1")
        if not (self.R_acc > 0 and self.R_turn_min > 0):
            raise ScenarioError("R_acc and R_turn_min must be positive")
        for label, p in (("start", self.start[:2]), ("goal", self.goal)):
            if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
                raise ScenarioError(f"{label} {tuple(p)} lies outside the map")
            if point_in_collision(self.obstacles, p[0], p[1], use_inflation=False):
                raise ScenarioError(f"{label} {tuple(p)} lies inside an obstacle")

    def with_n_ocp(self, n_ocp: int) -> "Scenario":
        return dataclasses.replace(self, N_ocp=int(n_ocp))


def _section(data: dict, key: str, cls, defaults=None):
    raw = data.get(key)
    if raw is None:
        return defaults() if defaults else cls()
    if not isinstance(raw, dict):
        raise ScenarioError(f"'{key}' must be a mapping")
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = set(raw) - names
    if unknown:
        raise ScenarioError(f"unknown keys in '{key}': {sorted(unknown)}")
    base = defaults() if defaults else None
    try:
        if base is not None:
            return dataclasses.replace(base, **raw)
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid '{key}': {exc}") from exc


def _vessel(raw) -> VesselParams:
    base = default_params()
    if raw is None:
        return base
    if not isinstance(raw, dict):
        raise ScenarioError("'vessel' must be a mapping")
    fields = dict(
        mass_matrix=base.mass_matrix,
        damping_linear=base.damping_linear,
        damping_quadratic=base.damping_quadratic,
        control_lb=base.control_lb,
        control_ub=base.control_ub,
        state_lb=base.state_lb,
        state_ub=base.state_ub,
        r_max=base.r_max,
        min_turn_radius=base.min_turn_radius,
    )
    raw = dict(raw)
    if "r_max_deg" in raw:
        raw["r_max"] = np.deg2rad(float(raw.pop("r_max_deg")))
    unknown = set(raw) - set(fields)
    if unknown:
        raise ScenarioError(f"unknown keys in 'vessel': {sorted(unknown)}")
    fields.update(raw)
    if "r_max" in raw and not {"state_lb", "state_ub"} & set(raw):
        lb, ub = np.array(fields["state_lb"], float), np.array(fields["state_ub"], float)
        lb[5], ub[5] = -fields["r_max"], fields["r_max"]
        fields["state_lb"], fields["state_ub"] = lb, ub
    try:
        for k in ("state_lb", "state_ub"):
            fields[k] = np.array([float(v) for v in fields[k]])
        return VesselParams(**fields)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid 'vessel': {exc}") from exc


def _need(data, key):
    if key not in data:
        raise ScenarioError(f"missing required key '{key}'")
    return data[key]


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at the top level")
    try:
        bounds = tuple(float(v) for v in _need(data, "map_bounds"))
        if len(bounds) != 4:
            raise ScenarioError("map_bounds needs four numbers")
        obs_raw = _need(data, "obstacles") or {}
        ellipses = tuple(EllipseObstacle(**{k: float(v) for k, v in e.items()}) for e in obs_raw.get("ellipses", []))
        obs = ObstacleSet(
            ellipses,
            epsilon=float(obs_raw.get("epsilon", 1e-6)),
            inflation=float(obs_raw.get("inflation", 0.0)),
        )
        st = _need(data, "start")
        start = (float(st["x_s"]), float(st["y_s"]), float(st["u_rs"]))
        gl = _need(data, "goal")
        goal = (float(gl["x_f"]), float(gl["y_f"]))
        passage = data.get("passage")
        return Scenario(
            map_bounds=bounds,
            obstacles=obs,
            start=start,
            goal=goal,
            t_max=float(_need(data, "t_max")),
            delta_d=float(data.get("delta_d", 50.0)),
            N_ocp=int(data.get("N_ocp", 1000)),
            K_ocp=int(data.get("K_ocp", 1)),
            weights=_section(data, "cost_weights", CostWeights),
            R_acc=float(data.get("R_acc", 10.0)),
            R_turn_min=float(data.get("R_turn_min", 24.5)),
            params=_vessel(data.get("vessel")),
            solver=_section(data, "solver", SolverConfig),
            passage=Corridor(**{k: float(v) for k, v in passage.items()}) if passage else None,
            name=str(data.get("name", "scenario")),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from exc
    return scenario_from_dict(data)
