import numpy as np
import pytest

from rismimo import build_scenario

# Filled by tests/test_acceptance.py, printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def default_scenario():
    return build_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
