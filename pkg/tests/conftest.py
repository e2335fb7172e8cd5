import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("covercraft", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("covercraft")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS):
            terminalreporter.write_line(line)
