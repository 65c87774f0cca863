import numpy as np
import pytest

from tvdecomp import build_grid, sample_coefficients

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    return build_grid(1.0, 64)


@pytest.fixture
def ones(unit_grid):
    c = {"family": "constant", "c": 1.0}
    return sample_coefficients(c, c, unit_grid)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
