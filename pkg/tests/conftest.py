import numpy as np
import pytest

from influence_game_lab.scenario import PathArrays

EQ_LAPLACIAN = np.array(
    [[3, -1, -1, -1], [-1 / 3, 2, -2 / 3, -1], [0, -1, 1, 0], [-1, -2, 0, 3]], dtype=float
)


def random_path(rng, K, n, m, rho_scale=2.0):
    """A synthetic path with positive weights and simplex opinion rows."""
    rho = rng.uniform(0.05, rho_scale, size=(K, n))
    x = rng.dirichlet(np.ones(m), size=(K, n)) if m > 1 else rng.uniform(0, 1, size=(K, n, 1))
    return PathArrays(rho, x)


def random_laplacian(rng, n, density=0.6):
    w = rng.uniform(0, 2, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    np.fill_diagonal(w, 0)
    return np.diag(w.sum(axis=1)) - w


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
