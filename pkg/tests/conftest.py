import numpy as np
import pytest
from hypothesis import settings

from cardsvm import Dataset, KernelSpec, ProblemSpec

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def random_dataset(rng, m, n, scale=1.0):
    x = rng.normal(size=(m, n)) * scale
    y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    return Dataset(x, y)


def tiny_problem(seed, m=20, n=6, kernel=None, C=10.0, B=None):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, m, n)
    return ProblemSpec(d, kernel or KernelSpec.polynomial(2, 0.1, 1.0), C, B)


@pytest.fixture
def toy_pair():
    """Two points x=1 and x=-1 on a line, labels +1 and -1."""
    return Dataset(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]))


@pytest.fixture
def three_points():
    x = np.array([[0.0, 1.0, -0.5], [-1.0, -1.0, -1.0], [0.0, -1.0, 0.0]])
    y = np.array([-1.0, 1.0, 1.0])
    return Dataset(x, y), np.array([1.0, 0.5, 0.5])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
