import numpy as np
import pytest

from chronohurst import MonthlySeries, difference, load_bundled

# acceptance criteria append (number, ok, line) here; printed at session end
ACCEPTANCE_LINES: list = []


def white(n, seed, start="2000-01"):
    return MonthlySeries(start, np.random.default_rng(seed).standard_normal(n))


@pytest.fixture(scope="session")
def bundled():
    return load_bundled()


@pytest.fixture(scope="session")
def bundled_diff(bundled):
    return difference(bundled, 1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
