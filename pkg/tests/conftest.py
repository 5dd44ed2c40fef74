import math

import pytest
from hypothesis import settings

from cavity_emission.cli import CONFIG_DIR
from cavity_emission.modes import find_resonances, reduced_mode
from cavity_emission.multilayer import ConstPermittivity, load_stack, slab_stack

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig2():
    """Reference reduced set: gamma_rad = 0.9, detuning 0.1, R = 10, w_k = 2e8 (Gamma = 1)."""
    return reduced_mode(0.9, 0.1, 10.0, 2e8)


@pytest.fixture(scope="session")
def lossless_stack():
    return load_stack(CONFIG_DIR / "lossless_slab.json")


@pytest.fixture(scope="session")
def lorentz_stack():
    return load_stack(CONFIG_DIR / "lorentz_slab.json")


@pytest.fixture(scope="session")
def lossless_modes(lossless_stack):
    return find_resonances(lossless_stack, (85.0, 105.0))


@pytest.fixture(scope="session")
def lorentz_modes(lorentz_stack):
    return find_resonances(lorentz_stack, (85.0, 105.0))


@pytest.fixture(scope="session")
def lossy_interior_stack():
    return slab_stack(1.0, 400.0, 8.33e-4, eps_inside=ConstPermittivity(1.0 + 1e-3j))


def nearest(modes, w):
    return min(modes, key=lambda m: abs(m.omega_k - w))


FSR = math.pi
