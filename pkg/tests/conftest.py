import numpy as np
import pytest

from rydpair.blockade import SequenceParams
from rydpair.noise import NoiseParams

ACCEPTANCE_LINES = []


@pytest.fixture
def reference_params():
    return SequenceParams()


@pytest.fixture
def blockaded_params():
    """Near-perfect blockade for noiseless reference runs."""
    p = SequenceParams()
    return p.replace(delta_E=1e4 * p.omega_up_r, temperature=0.0)


@pytest.fixture
def noiseless():
    return NoiseParams.noiseless()


@pytest.fixture
def theta_grid():
    return np.linspace(0.0, 2 * np.pi, 24)


def random_hermitian(rng, dim=9, scale=2 * np.pi * 20e6):
    M = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (M + M.conj().T) / 2


def random_state(rng, dim=9):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
