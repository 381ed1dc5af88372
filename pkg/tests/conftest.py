import numpy as np
import pytest

from graphflow.graph import Edge, MetricGraph
from graphflow.velocity import VelocityProfile


def two_cycle():
    return MetricGraph.build(
        ["v1", "v2"],
        [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")],
        {("v2", "e1"): 1.0, ("v1", "e2"): 1.0},
    )


def three_cycle(perturb=None):
    # flow v1 -> v2 -> v3 -> v1
    w = {("v1", "e1"): 1.0, ("v2", "e2"): 1.0, ("v3", "e3"): 1.0}
    if perturb is not None:
        w[perturb[0]] = perturb[1]
    return MetricGraph.build(
        ["v1", "v2", "v3"],
        [Edge("e1", "v2", "v1"), Edge("e2", "v3", "v2"), Edge("e3", "v1", "v3")],
        w,
    )


def unit(m):
    return [VelocityProfile.constant(1.0) for _ in range(m)]


def sinusoids(m):
    return [VelocityProfile.sinusoid(2.0, 0.5 + 0.2 * j, 1.0 + 0.5 * j, 0.3 * j) for j in range(m)]


@pytest.fixture
def g2():
    return two_cycle()


@pytest.fixture
def g3():
    return three_cycle()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register one line each; printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
