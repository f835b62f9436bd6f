import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("dirkdg", max_examples=40, deadline=None)
settings.load_profile("dirkdg")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def fourier_mode(k, shift=0.0):
    """Complex exponential e^{i(kx + shift)} as a vectorised callable."""
    return lambda x: np.exp(1j * (k * np.asarray(x) + shift))
