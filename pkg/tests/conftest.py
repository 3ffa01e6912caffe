import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


def random_complex(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_hermitian(rng, dim):
    mat = random_complex(rng, dim, dim)
    return (mat + mat.conj().T) / 2.0
