import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture
def diagonal_pair():
    from specflag.tuples import certify_commuting
    return certify_commuting([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])


@pytest.fixture
def triangular_pair():
    from specflag.tuples import certify_commuting
    a = np.array([[1.0, 1.0], [0.0, 2.0]])
    return certify_commuting([a, a @ a])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[i])
