import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from scaling_reduction.examples import build_suite

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ho():
    return build_suite("ho")


@pytest.fixture(scope="session")
def so3():
    return build_suite("so3")


@pytest.fixture(scope="session")
def linear():
    return build_suite("linear")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
