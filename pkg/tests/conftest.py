import numpy as np
import pytest

from ldicert.construct import CandidateFamily
from ldicert.expr import parse
from ldicert.farkas import CandidateLDI, DynamicalSystem, Region
from ldicert.problem import bundled, load

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def example1():
    return load(bundled("example1"))


@pytest.fixture(scope="session")
def example2():
    return load(bundled("example2"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cubic():
    """x+ = 0.5 x + 0.1 x^3 on [-1, 1]: slopes f(x)/x fill [0.5, 0.6]."""
    system = DynamicalSystem(1, 0, (parse("0.5*x1 + 0.1*x1^3", 1),), [0.0], [])
    region = Region([[-1.0, 1.0]], np.zeros((0, 2)))
    family = CandidateFamily(CandidateLDI.from_matrices([[[0.4]], [[0.7]]]),
                             CandidateLDI.from_matrices([[[0.52]], [[0.58]]]))
    return system, region, family
