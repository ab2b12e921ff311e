"""Dense linear algebra on ``(C^d)^{⊗t}`` with explicit factor bookkeeping.

Conventions used everywhere in the package:

* factor 0 is the leftmost (most significant) tensor slot, and basis kets
  are enumerated in row-major order, i.e. ``|i_0 i_1 ... i_{t-1}>`` has index
  ``sum_k i_k d^{t-1-k}``;
* permutations are tuples ``sigma`` with ``sigma[k]`` the image of ``k``;
  ``P(sigma)`` maps ``|i_0 ... i_{t-1}>`` to the ket whose slot ``k`` holds
  ``i_{sigma^{-1}(k)}``, so ``P(sigma) P(tau) = P(sigma ∘ tau)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceGuardError, ShapeError

DEFAULT_TOL = 1e-10

Permutation = tuple[int, ...]


@dataclass(frozen=True)
class TensorSpace:
    """``t`` copies of ``C^d``."""

    d: int
    t: int

    def __post_init__(self):
        if self.d < 1 or self.t < 0:
            raise ValueError(f"invalid tensor space d={self.d}, t={self.t}")

    @property
    def dim(self) -> int:
        return self.d**self.t

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.d,) * self.t


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex 2-d array."""
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{name} has non-finite entries")
    return a


def _factor_subset(subset: Iterable[int], t: int) -> tuple[int, ...]:
    idx = tuple(sorted(int(i) for i in subset))
    if len(set(idx)) != len(idx) or any(i < 0 or i >= t for i in idx):
        raise ShapeError(f"factor subset {idx} is not a set of positions in [0, {t})")
    return idx


def _check_square(x: np.ndarray, space: TensorSpace) -> None:
    if x.shape != (space.dim, space.dim):
        raise ShapeError(
            f"expected a {space.dim}x{space.dim} operator on (C^{space.d})^⊗{space.t}, "
            f"got {x.shape}"
        )


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices; the empty product is ``[[1]]``."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, (as_matrix(o) for o in ops))


def kron_power(a, t: int) -> np.ndarray:
    """``a^{⊗t}``."""
    return kron(*([a] * t))


def partial_transpose(x, space: TensorSpace, subset: Iterable[int]) -> np.ndarray:
    """Transpose the row/column indices of the factors in ``subset`` only."""
    x = as_matrix(x)
    _check_square(x, space)
    subset = _factor_subset(subset, space.t)
    if not subset:
        return x.copy()
    t = space.t
    axes = list(range(2 * t))
    for i in subset:
        axes[i], axes[t + i] = axes[t + i], axes[i]
    y = x.reshape(space.shape * 2).transpose(axes)
    return y.reshape(space.dim, space.dim)


def partial_trace(x, space: TensorSpace, subset: Iterable[int]) -> np.ndarray:
    """Trace out the factors in ``subset``; the remaining factors keep their order."""
    x = as_matrix(x)
    _check_square(x, space)
    subset = _factor_subset(subset, space.t)
    if not subset:
        return x.copy()
    t = space.t
    letters = [chr(ord("a") + i) for i in range(2 * t)]
    col = letters[t:]
    for i in subset:
        col[i] = letters[i]
    keep = [i for i in range(t) if i not in subset]
    out = "".join(letters[i] for i in keep) + "".join(col[i] for i in keep)
    spec = "".join(letters[:t]) + "".join(col) + "->" + out
    y = np.einsum(spec, x.reshape(space.shape * 2))
    k = space.d ** len(keep)
    return y.reshape(k, k)


def inverse_permutation(sigma: Sequence[int]) -> Permutation:
    inv = [0] * len(sigma)
    for k, s in enumerate(sigma):
        inv[s] = k
    return tuple(inv)


def compose(sigma: Sequence[int], tau: Sequence[int]) -> Permutation:
    """``sigma ∘ tau`` (apply ``tau`` first)."""
    return tuple(sigma[tau[k]] for k in range(len(tau)))


def cycle_count(sigma: Sequence[int]) -> int:
    seen = [False] * len(sigma)
    cycles = 0
    for start in range(len(sigma)):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = sigma[k]
    return cycles


def _check_permutation(sigma: Sequence[int], t: int) -> Permutation:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(t)):
        raise ShapeError(f"{sigma} is not a permutation of {t} symbols")
    return sigma


def permutation_matrix(sigma: Sequence[int], space: TensorSpace) -> np.ndarray:
    """0/1 unitary realizing ``sigma`` on ``(C^d)^{⊗t}`` (see module conventions)."""
    sigma = _check_permutation(sigma, space.t)
    dim = space.dim
    if space.t == 0:
        return np.ones((1, 1), dtype=complex)
    cols = np.arange(dim)
    digits = np.unravel_index(cols, space.shape)
    inv = inverse_permutation(sigma)
    rows = np.ravel_multi_index(tuple(digits[inv[k]] for k in range(space.t)), space.shape)
    p = np.zeros((dim, dim), dtype=complex)
    p[rows, cols] = 1.0
    return p


def all_permutations(t: int) -> list[Permutation]:
    return list(itertools.permutations(range(t)))


def swap_operator(d: int) -> np.ndarray:
    return permutation_matrix((1, 0), TensorSpace(d, 2))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^† b)``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def frobenius(x) -> float:
    return float(np.linalg.norm(x))


def is_hermitian(x, tol: float = DEFAULT_TOL) -> bool:
    x = as_matrix(x)
    return x.shape[0] == x.shape[1] and np.abs(x - x.conj().T).max(initial=0.0) <= tol


def hermitian_part(x) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def factorial_guard(t: int, limit: int = 6) -> None:
    if t > limit:
        raise ResourceGuardError(
            f"t={t} exceeds the factorial guard t <= {limit} ({math.factorial(t)} permutations)"
        )


def dimension_guard(dim: int, limit: int = 256) -> None:
    if dim > limit:
        raise ResourceGuardError(f"total dimension {dim} exceeds the dense limit {limit}")
