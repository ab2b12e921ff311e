"""How a group element acts on a tensor space.

Two sources are supported. A *collective* representation is a tensor
product of copies of the defining representation ``U`` and its complex
conjugate ``Ū``, described by one tag per factor. A *custom* representation
is given by a finite list of invertible matrices that generate the group
image; it cannot be evaluated on an arbitrary ``U`` and is only usable by the
exact (nullspace) routines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ShapeError
from .tensor import as_matrix, kron

PLAIN = "plain"
CONJUGATE = "conjugate"
_TAGS = (PLAIN, CONJUGATE)


@dataclass(frozen=True, eq=False)
class Representation:
    d: int
    factors: tuple[str, ...] = ()
    generators: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        bad = [f for f in self.factors if f not in _TAGS]
        if bad:
            raise ContractError(f"unknown factor tags {bad}; use {_TAGS}")
        if self.generators is not None:
            gens = tuple(as_matrix(g, "generator") for g in self.generators)
            if not gens:
                raise ContractError("a custom representation needs at least one generator")
            n = gens[0].shape[0]
            for g in gens:
                if g.shape != (n, n):
                    raise ShapeError("custom generators must be square and of equal size")
                if abs(np.linalg.det(g)) < 1e-12:
                    raise ContractError("custom generators must be invertible")
            object.__setattr__(self, "generators", gens)

    @classmethod
    def collective(cls, d: int, t: int, conjugate: bool = False) -> "Representation":
        return cls(d, (CONJUGATE if conjugate else PLAIN,) * t)

    @classmethod
    def custom(cls, d: int, generators) -> "Representation":
        return cls(d, (), tuple(generators))

    @property
    def is_collective(self) -> bool:
        return self.generators is None

    @property
    def is_plain_power(self) -> bool:
        return self.is_collective and all(f == PLAIN for f in self.factors)

    @property
    def dim(self) -> int:
        if self.is_collective:
            return self.d ** len(self.factors)
        return self.generators[0].shape[0]

    @property
    def key(self):
        """Hashable identity for caching collective representations."""
        if not self.is_collective:
            return None
        return (self.d, self.factors)

    def __call__(self, u) -> np.ndarray:
        """Image of the ``d x d`` matrix ``u``."""
        if not self.is_collective:
            raise ContractError("a custom representation cannot be evaluated on arbitrary group elements")
        u = as_matrix(u)
        ubar = u.conj()
        return kron(*(u if f == PLAIN else ubar for f in self.factors))

    def batch(self, us: np.ndarray) -> np.ndarray:
        """Images of a stack ``(n, d, d)`` of group elements, shape ``(n, D, D)``."""
        if not self.is_collective:
            raise ContractError("a custom representation cannot be evaluated on arbitrary group elements")
        n = us.shape[0]
        out = np.ones((n, 1, 1), dtype=complex)
        for f in self.factors:
            g = us if f == PLAIN else us.conj()
            out = np.einsum("nab,ncd->nacbd", out, g).reshape(n, out.shape[1] * self.d, out.shape[2] * self.d)
        return out

    def conjugate(self) -> "Representation":
        if self.is_collective:
            return Representation(self.d, tuple(CONJUGATE if f == PLAIN else PLAIN for f in self.factors))
        return Representation(self.d, (), tuple(g.conj() for g in self.generators))

    def tensor(self, other: "Representation") -> "Representation":
        """``self ⊗ other`` acting with the same group element on both parts."""
        if self.d != other.d:
            raise ContractError("representations of different local dimension")
        if self.is_collective and other.is_collective:
            return Representation(self.d, self.factors + other.factors)
        left, right = self._generator_list(other), other._generator_list(self)
        if len(left) != len(right):
            raise ContractError("custom representations must list the same number of generators to be tensored")
        return Representation(self.d, (), tuple(np.kron(a, b) for a, b in zip(left, right)))

    def _generator_list(self, partner: "Representation") -> list[np.ndarray]:
        if not self.is_collective:
            return list(self.generators)
        if self.factors:
            raise ContractError("cannot pair a non-trivial collective action with custom generators")
        n = len(partner.generators) if partner.generators is not None else 1
        return [np.ones((1, 1), dtype=complex)] * n


def choi_representation(rep_out: Representation, rep_in: Representation) -> Representation:
    """``π_out ⊗ π̄_in`` acting on output ⊗ input."""
    return rep_out.tensor(rep_in.conjugate())
