import numpy as np
import pytest

from coexist.grid import Grid


@pytest.fixture(scope="session")
def grid199():
    return Grid(199)


@pytest.fixture(scope="session")
def grid99():
    return Grid(99)


@pytest.fixture(scope="session")
def grid31():
    return Grid(31)


def discrete_lambda1(n, length=1.0):
    """Exact principal eigenvalue of the n-point second-difference
    Laplacian: (4/h^2) sin^2(pi h / (2 L))."""
    h = length / (n + 1)
    return 4.0 / h**2 * np.sin(np.pi * h / (2.0 * length)) ** 2
