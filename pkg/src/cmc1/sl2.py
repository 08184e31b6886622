"""Small helpers for 2x2 complex matrices (frames and monodromies)."""

import numpy as np

E3 = np.array([[1, 0], [0, -1]], dtype=complex)


def identity() -> np.ndarray:
    return np.eye(2, dtype=complex)


def det(m: np.ndarray) -> complex:
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def inverse(m: np.ndarray) -> np.ndarray:
    """Inverse through the adjugate; exact for unit determinant."""
    a, b, c, d = m.ravel()
    return np.array([[d, -b], [-c, a]]) / (a * d - b * c)


def su2_residual(m: np.ndarray) -> float:
    """max |M M* - I|; zero iff M is unitary (with unit det, M in SU(2))."""
    return float(np.max(np.abs(m @ dagger(m) - np.eye(2))))


def su11_residual(m: np.ndarray) -> float:
    """max |M e3 M* - e3|; zero iff M preserves the form diag(1, -1)."""
    return float(np.max(np.abs(m @ E3 @ dagger(m) - E3)))


def random_sl2(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random SL(2,C) element with entries of size about ``scale``."""
    while True:
        a, b, c = scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3)) / np.sqrt(2)
        if abs(a) > 0.3 * scale:
            return np.array([[a, b], [c, (1 + b * c) / a]])
