import numpy as np
import pytest

from pdae.models import GridSpec
from pdae.services.problem import PdaeProblem, get_problem


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def example1():
    return get_problem("1")


@pytest.fixture(scope="session")
def example2():
    return get_problem("2")


@pytest.fixture(scope="session")
def demo():
    return get_problem("demo")


def make_linear_problem() -> PdaeProblem:
    """u_t + u_x = 3 with u = x + 2t; any stencil of degree >= 1 reproduces it."""
    exact = lambda x, t: np.array([x + 2.0 * t])
    return PdaeProblem(
        name="linear",
        n=1,
        A=lambda x, t: np.eye(1),
        B=lambda x, t: np.eye(1),
        C=lambda x, t: np.zeros((1, 1)),
        f=lambda x, t: np.array([3.0]),
        psi=lambda t: exact(0.0, t),
        phi=lambda x: exact(x, 0.0),
        exact=exact,
        exact_dx=lambda x, t: np.array([1.0]),
        exact_dt=lambda x, t: np.array([2.0]),
    )


def make_zero_problem() -> PdaeProblem:
    return PdaeProblem(
        name="zero",
        n=2,
        A=lambda x, t: np.zeros((2, 2)),
        B=lambda x, t: np.zeros((2, 2)),
        C=lambda x, t: np.zeros((2, 2)),
        f=lambda x, t: np.ones(2),
        psi=lambda t: np.zeros(2),
        phi=lambda x: np.zeros(2),
    )


@pytest.fixture
def linear_problem():
    return make_linear_problem()


@pytest.fixture
def zero_problem():
    return make_zero_problem()


@pytest.fixture
def coarse_grid():
    return GridSpec(h=0.1, tau=0.1)
