import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from abcprior import NormalKnownVar, PoissonGamma

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def normal_model():
    """The worked Normal example: n=100, sigma2=2, m=10, s2=0.02, xbar0=9.975."""
    return NormalKnownVar()


@pytest.fixture(scope="session")
def poisson_model():
    return PoissonGamma(n=10, r=2.0, v=1.0, sum_x0=30.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
