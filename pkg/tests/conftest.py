import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chowlab.sieve import build_block

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def block_1e5():
    return build_block(1, 100_001)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)
