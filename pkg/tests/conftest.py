import pytest
from hypothesis import HealthCheck, settings

from ca_signals import builtin_log2, builtin_xy, run

settings.register_profile(
    "suite", max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def log2_diag():
    # big enough for digit readouts k <= 64 and all early-word tests
    return run(builtin_log2(), 256)


@pytest.fixture(scope="session")
def xy23_diag():
    return run(builtin_xy(2, 3), 300)
