import numpy as np
import pytest

from extharper import build_hamiltonian, diagonalize, model_point


@pytest.fixture(scope="session")
def eigensystem_cache():
    """Memoized diagonalizations keyed by (lam, mu, m, ky); N=987 spectra are
    expensive enough to share across tests."""
    cache = {}

    def get(lam, mu, m, ky=0.0):
        key = (lam, mu, m, ky)
        if key not in cache:
            cache[key] = diagonalize(build_hamiltonian(model_point(lam, mu, m, ky)))
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
