import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SEED = 20200712

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


@st.composite
def interval_samples(draw, max_samples=16):
    n = draw(st.integers(1, max_samples))
    flat = draw(st.lists(finite, min_size=2 * n, max_size=2 * n))
    dt = draw(st.floats(min_value=1e-3, max_value=2.0))
    return np.array(flat).reshape(n, 2), dt


def sigma3(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


# One PASS/FAIL line per acceptance criterion at the end of the run.
_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid and "criterion" in report.nodeid:
        _acceptance[report.nodeid] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, ok in _acceptance.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {nodeid.split('::')[-1]}")
