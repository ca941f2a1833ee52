import numpy as np
import pytest

from hhlab.draws import draw_rs
from hhlab.kernels import BUILTIN_IDS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def valid_draws(rng, kid, count, lam_range=(0.5, 3.0)):
    """``count`` admissible (kernel, cfg) pairs for one built-in id."""
    return [draw_rs(rng, 2.0, ids=(kid,), lam_range=lam_range)[:2] for _ in range(count)]


ALL_IDS = BUILTIN_IDS


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
