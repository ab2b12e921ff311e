"""Haar sampling on U(d) and SU(d)."""

from __future__ import annotations

import numpy as np


def haar_unitaries(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-distributed unitaries, shape ``(n, d, d)``.

    Complex Ginibre matrix followed by QR, with the phases of ``diag(R)``
    pushed into ``Q`` so the distribution is exactly Haar.
    """
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_unitary(d: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return haar_unitaries(d, 1, rng)[0]


def haar_special_unitaries(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar U(d) samples divided by the principal ``d``-th root of their determinant."""
    u = haar_unitaries(d, n, rng)
    det = np.linalg.det(u)
    return u / (det ** (1.0 / d))[:, None, None]
