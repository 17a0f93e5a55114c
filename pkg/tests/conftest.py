from pathlib import Path

import pytest

from asvplan.vessel_model import CostWeights, default_params

ROOT = Path(__file__).resolve().parents[1]
SHIPPED_SCENARIO = ROOT / "scenarios" / "two_island_passage.yaml"


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def weights():
    return CostWeights()


def pytest_terminal_summary(terminalreporter):
    from report import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
