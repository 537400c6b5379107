import numpy as np
import pytest

from bumplab.lattice import build_lattice


@pytest.fixture
def lat8():
    return build_lattice([(-8.0, 8.0)], 8)


@pytest.fixture
def lat6():
    return build_lattice([(-8.0, 8.0)], 6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
