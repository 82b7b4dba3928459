import math
import warnings

import pytest

from chtransit.params import ModelParams
from chtransit.spectral import DomainSpec


@pytest.fixture
def interval():
    return DomainSpec.rectangular(math.pi, 64)


@pytest.fixture
def square():
    return DomainSpec.rectangular((math.pi, math.pi), 32)


@pytest.fixture
def loop3():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return DomainSpec.loop(3.0, 32)


@pytest.fixture
def torus2():
    return DomainSpec.torus(2, 32)


@pytest.fixture
def type1_params():
    return ModelParams(1.03, 0.0, 2.0)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    lines = [line for _, (_, line) in sorted(test_acceptance.RESULTS.items())]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
