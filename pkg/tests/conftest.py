import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rangeprof.verify import crandn, random_instance, random_pd

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_instance(rng):
    """Random prior/disturbance pair with L=8, P=3."""
    prior, dist = random_instance(rng, 8, 3)
    return prior, dist, crandn(rng, 8)


__all__ = ["crandn", "random_pd", "random_instance"]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
