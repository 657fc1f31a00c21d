import numpy as np
import pytest
import scipy.linalg

from ctlasso import StandardizedDesign, standardize


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_design(rng, n, p, s=None, noise=1.0, beta_scale=2.0):
    """Random Gaussian design with a sparse truth; returns (design, beta_star)."""
    if s is None:
        s = min(p, 3)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:s] = rng.normal(0.0, beta_scale, s)
    y = x @ beta + noise * rng.standard_normal(n)
    return standardize(x, y), beta


def orthogonal_design(rng, p=5, n=8):
    """Exactly orthogonal standardized design built from Hadamard columns."""
    if n not in (8, 16, 32):
        raise ValueError("n must be a Hadamard size")
    h = scipy.linalg.hadamard(n).astype(float)
    if p > n - 1:
        raise ValueError("p too large for exact orthogonality")
    x = h[:, 1 : p + 1]
    y = rng.standard_normal(n)
    return standardize(x, y)


@pytest.fixture
def toy_design():
    x = np.array([[2.0, 1.0], [4.0, 3.0], [6.0, 2.0]])
    y = np.array([1.0, 2.0, 3.0])
    return standardize(x, y)
