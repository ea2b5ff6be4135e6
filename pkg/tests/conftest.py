import numpy as np
import pytest

from park_ems import synthetic
from park_ems.ageing import CycleSummary
from park_ems.env import EpisodeConfig, ParkEnv, ParkSpec, with_calibrated_ageing

REFERENCE_CYCLE = CycleSummary(0.25, 0.8, 1000.0)


@pytest.fixture(scope="session")
def month():
    return synthetic.generate(0)


@pytest.fixture(scope="session")
def park():
    return with_calibrated_ageing(ParkSpec(), REFERENCE_CYCLE)


@pytest.fixture
def env(month, park):
    return ParkEnv(month, park, EpisodeConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, passed, detail = RESULTS[number]
        terminalreporter.write_line(
            f"criterion {number} ({title}): {'PASS' if passed else 'FAIL'} - {detail}")
