import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nfisac.config import ScenarioConfig, config_from_dict

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


SMALL = {
    "system": {"fc_list": [100e9], "bs_antennas": 16, "rf_chains": 8, "hn_tx_antennas": 4, "hn_rx_antennas": 4,
               "num_hns": 6, "streams": 3, "apply_digital_boost": True},
    "scenario": {"num_slots": 5, "num_seeds": 2, "eve_antennas": 4, "hn_range_m": [10.0, 30.0],
                 "eve_range_m": [10.0, 30.0]},
    "belief": {"num_bins": 61},
}


@pytest.fixture
def small_cfg() -> ScenarioConfig:
    """Tiny arrays and a coarse grid so that whole episodes run in milliseconds."""
    return config_from_dict(SMALL)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def report_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
