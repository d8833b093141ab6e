import sys

import numpy as np
import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the per-criterion acceptance lines, which normal output
    capture would otherwise hide for passing tests."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERIA_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

from bgsdc.fields import MirrorField, MirrorParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240824)


@pytest.fixture
def mirror_scenario_2():
    """Shallow mirror trap used by the convergence benchmarks."""
    omega_B, z0, alpha = 400.0, 16.0, 1.0
    field = MirrorField(MirrorParams.from_frequencies(omega_B, alpha, z0))
    x0 = np.array([1.0, 0.0, 0.0])
    v0 = np.array([100.0, 0.0, 50.0])
    return field, alpha, omega_B, x0, v0


@pytest.fixture
def mirror_scenario_1():
    """Deep mirror trap used by the reflection benchmarks."""
    omega_B, z0, alpha = 2000.0, 200.0, 1.0
    field = MirrorField(MirrorParams.from_frequencies(omega_B, alpha, z0))
    x0 = np.array([1.0, 0.5, 0.0])
    v0 = np.array([100.0, 0.0, 50.0])
    return field, alpha, omega_B, x0, v0
