import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from prophet_samples.distributions import DiscreteDistribution, Instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def dists(draw, max_support=3, top=9, with_zero=None):
    m = draw(st.integers(1, max_support))
    values = draw(st.lists(st.integers(0, top), min_size=m, max_size=m, unique=True))
    if with_zero is True and 0 not in values:
        values[0] = 0
    if with_zero is False:
        values = [v + 1 for v in values]
    weights = draw(st.lists(st.integers(1, 9), min_size=m, max_size=m))
    order = np.argsort(values)
    total = sum(weights)
    return DiscreteDistribution(tuple(float(values[i]) for i in order), tuple(weights[i] / total for i in order))


@st.composite
def instances(draw, min_n=1, max_n=4, max_support=3):
    n = draw(st.integers(min_n, max_n))
    return Instance(tuple(draw(dists(max_support)) for _ in range(n)))


@st.composite
def prefixed_instances(draw, min_n=2, max_n=5, max_support=3):
    """An i.i.d. prefix of length s >= n - 2 followed by arbitrary variables."""
    n = draw(st.integers(min_n, max_n))
    s = draw(st.integers(max(n - 2, 0), n))
    head = draw(dists(max_support))
    tail = [draw(dists(max_support)) for _ in range(n - s)]
    return Instance((head,) * s + tuple(tail), s)


def bernoulli_half():
    return DiscreteDistribution((0.0, 1.0), (0.5, 0.5))


@pytest.fixture
def two_bernoulli():
    return Instance.iid(bernoulli_half(), 2)


@pytest.fixture
def mixed_pair():
    return Instance((DiscreteDistribution.point(1.0), DiscreteDistribution((0.0, 2.0), (0.5, 0.5))))


SQRT3_M1 = math.sqrt(3.0) - 1.0


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
