import numpy as np

from nonclassical import fock


def random_state(rng, dim, support=None):
    """Random normalized pure state with weight only on levels < support."""
    support = dim - 3 if support is None else support
    c = np.zeros(dim, dtype=complex)
    c[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return fock.StateVector(fock.make_space(dim), c / np.linalg.norm(c))


def random_coherent_mixture(rng, dim=64, max_components=3, max_abs2=4.0):
    J = int(rng.integers(1, max_components + 1))
    alphas = np.sqrt(rng.uniform(0, max_abs2, J)) * np.exp(1j * rng.uniform(0, 2 * np.pi, J))
    weights = rng.dirichlet(np.ones(J))
    return fock.coherent_mixture(fock.make_space(dim), alphas, weights)
