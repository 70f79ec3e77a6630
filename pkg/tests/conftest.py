import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def unit(k, dim):
    e = np.zeros(dim)
    e[k] = 1.0
    return e


@pytest.fixture
def e():
    """e(k, dim) -> k-th standard basis vector (0-based)."""
    return unit


@pytest.fixture
def rng():
    from conicbounds.samplers import RngHandle
    return RngHandle(seed=12345, stream=0)


HALF_PI = 0.5 * math.pi


_ACCEPTANCE = []


def record_criterion(label, ok, detail):
    """Collect one line per acceptance criterion; printed in the terminal summary."""
    _ACCEPTANCE.append((label, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
