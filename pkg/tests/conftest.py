import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_signature(rng, n, p=None):
    from gpolar import Signature

    signs = np.ones(n)
    if p is None:
        signs = rng.choice([-1.0, 1.0], n)
    else:
        signs[p:] = -1.0
    return Signature(signs)


def rel(X, Y):
    return float(np.linalg.norm(X - Y) / np.linalg.norm(Y))
