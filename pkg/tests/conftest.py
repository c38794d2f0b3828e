import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_amplitudes(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)
