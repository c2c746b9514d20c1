import numpy as np
import pytest

from cellmat.element import element_matrices
from cellmat.mesh import build_mesh


@pytest.fixture(scope="session")
def mesh8():
    return build_mesh(8)


@pytest.fixture(scope="session")
def elem8():
    return element_matrices(1.0 / 3.0, 1.0 / 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20260818)


def cross_density(n, f):
    """Orthogonal-bar cross with solid fraction f, element-centered (ne,)."""
    w = 1.0 - np.sqrt(1.0 - f)
    c = (np.arange(n) + 0.5) / n
    on_x = np.abs(c - 0.5) < w / 2.0
    rho = np.zeros((n, n))
    rho[on_x, :] = 1.0
    rho[:, on_x] = 1.0
    return rho.ravel()
