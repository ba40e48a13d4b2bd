"""Random test objects: unit vectors, Hermitian and unitary matrices."""

import numpy as np


def as_rng(seed_or_rng=None):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_unit_vector(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_hermitian(rng, d, scale=1.0):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (X + X.conj().T) / 2


def random_unitary(rng, d):
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_unit_phase(rng):
    return np.exp(2j * np.pi * rng.uniform())
