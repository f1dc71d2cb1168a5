import numpy as np
import pytest

from aqc.oscillator import FockSpace
from aqc.splitting import FlatEnds


@pytest.fixture(scope="session")
def fig4_space():
    return FockSpace(dim=256, kT=1.0, hbar_omega=1.0)


@pytest.fixture(scope="session")
def fig4_profile():
    return FlatEnds(1.0, 2.0, -4.0, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_amplitudes(rng, dim, support=None):
    """Complex Gaussian amplitudes on the lowest ``support`` levels, normalized."""
    support = dim if support is None else support
    v = np.zeros(dim, dtype=complex)
    v[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return v / np.linalg.norm(v)
