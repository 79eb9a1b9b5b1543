import numpy as np
import pytest

from vardiss.config import random_bumps
from vardiss.profiles import build_equilibrium, build_profile

# Admissible matrix used by the Lyapunov / H^N checks. Viscosities are kept
# at or above 0.005; see the README for what happens below that.
ADMISSIBLE = [
    ("constant", {"mu0": 0.005}),
    ("constant", {"mu0": 0.02}),
    ("constant", {"mu0": 0.05}),
    ("exponential", {"mu0": 0.01, "eps": 2e-6}),
    ("exponential", {"mu0": 0.03, "eps": -1e-6}),
    ("tanh-blend", {"mu_a": 0.01, "mu_b": 0.010002, "width": 100.0}),
]


def equilibrium(kind, params, L_y=400.0, n=2048, sigma=None):
    return build_equilibrium(build_profile(kind, params, L_y, n), sigma)


def random_field(grid, seed, n_bumps=4):
    return random_bumps(grid, np.random.default_rng(seed), n_bumps)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# One line per acceptance criterion, printed at the end of the session.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda s: (len(s), s)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
