import numpy as np
import pytest

from asvplan.errors import ScenarioError
from asvplan.scenario import Corridor, load_scenario, scenario_from_dict

from conftest import SHIPPED_SCENARIO


def base(**over):
    d = {
        "map_bounds": [0, 500, 0, 500],
        "obstacles": {"ellipses": [{"x_c": 250, "y_c": 250, "x_a": 50, "y_a": 20, "alpha": 0.3}]},
        "start": {"x_s": 10, "y_s": 10, "u_rs": 2.0},
        "goal": {"x_f": 450, "y_f": 450},
        "t_max": 300,
    }
    d.update(over)
    return d


def test_defaults():
    s = scenario_from_dict(base())
    assert s.N_ocp == 1000 and s.K_ocp == 1 and s.delta_d == 50.0
    assert s.R_acc == 10.0 and s.R_turn_min == 24.5
    assert s.weights.K_e == 3.5e-4 and s.weights.K_t == 800.0
    assert s.params.r_max == pytest.approx(np.deg2rad(40))
    assert s.passage is None


def test_overrides():
    s = scenario_from_dict(base(
        cost_weights={"abs_smoothing": 1.0},
        solver={"max_outer_iterations": 7},
        vessel={"r_max_deg": 20},
        passage={"x_min": 0, "x_max": 10, "y_min": 0, "y_max": 10},
        N_ocp=50,
    ))
    assert s.weights.abs_smoothing == 1.0 and s.solver.max_outer_iterations == 7
    assert s.params.state_ub[5] == pytest.approx(np.deg2rad(20))
    assert s.with_n_ocp(20).N_ocp == 20


@pytest.mark.parametrize(
    "over",
    [
        {"goal": {"x_f": 250, "y_f": 250}},
        {"start": {"x_s": -5, "y_s": 10, "u_rs": 1}},
        {"t_max": 0},
        {"map_bounds": [0, 0, 0, 1]},
        {"solver": {"nonsense": 1}},
        {"vessel": {"hull": 3}},
        {"N_ocp": 0},
    ],
)
def test_invalid(over):
    with pytest.raises(ScenarioError):
        scenario_from_dict(base(**over))


def test_missing_key():
    d = base()
    del d["t_max"]
    with pytest.raises(ScenarioError, match="t_max"):
        scenario_from_dict(d)


def test_load_errors(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("map_bounds: [0, 1\n")
    with pytest.raises(ScenarioError):
        load_scenario(bad)


def test_corridor():
    c = Corridor(0, 10, 100, 200)
    assert c.route_uses([5, 5, 50], [90, 150, 250])
    assert not c.route_uses([5, 50], [150, 160])
    assert not c.route_uses([5], [50])
    with pytest.raises(ScenarioError):
        Corridor(1, 0, 0, 1)


def test_shipped_scenario_loads():
    s = load_scenario(SHIPPED_SCENARIO)
    assert len(s.obstacles) == 2 and s.passage is not None and s.N_ocp == 200
