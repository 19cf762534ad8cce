import numpy as np
import pytest

from shiftmatch import NoiseModel


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def zero_noise():
    return NoiseModel("degenerate0")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
