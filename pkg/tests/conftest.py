import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from photonwave import momentum_space as ms

settings.register_profile(
    "photonwave", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("photonwave")


@pytest.fixture(scope="session")
def grid32():
    return ms.MomentumGrid.cartesian_box(32, 4.0)


@pytest.fixture(scope="session")
def gauss32(grid32):
    return ms.make_gaussian_state(grid32, (1.5, 0.5, 0.7), 0.5, (0.8, 0.6j))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
