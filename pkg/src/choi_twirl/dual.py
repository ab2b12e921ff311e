"""Twirls as mixtures of unitary 1-design channels on invariant sectors.

A unitary operator basis ``{γ_l}`` of ``C^{D_U}`` is embedded into every
copy of the sector-``k`` irrep through the ``Π_k^{m1 m2}`` operators. Uniform
mixing over the embedded set depolarizes the irrep index while leaving the
multiplicity index alone, which is exactly the sector-``k`` Haar projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cartan import BetaWeights
from .channels import ChoiOperator
from .errors import ContractError, ShapeError
from .schur import Sector, SectorDecomposition


@dataclass(frozen=True, eq=False)
class UnitaryOperatorBasis:
    elements: np.ndarray  # (D^2, D, D)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]

    def check(self) -> tuple[float, float]:
        """Largest unitarity defect and largest deviation of ``Tr(B_a^† B_b)`` from ``D δ_ab``."""
        b = self.elements
        eye = np.eye(self.dim)
        unit = max(np.abs(x.conj().T @ x - eye).max() for x in b)
        flat = b.reshape(len(self), -1)
        gram = flat.conj() @ flat.T
        return float(unit), float(np.abs(gram - self.dim * np.eye(len(self))).max())


@dataclass(frozen=True, eq=False)
class EmbeddedKrausSet:
    label: int
    operators: np.ndarray  # (D_U^2, D, D)

    def apply(self, x) -> np.ndarray:
        """``(1/D_U^2) Σ_l γ̃_l x γ̃_l^†``."""
        g = self.operators
        return np.einsum("lab,bc,ldc->ad", g, x, g.conj()) / len(g)


def heisenberg_weyl(dim: int) -> UnitaryOperatorBasis:
    """``{ω^{ij} Z^i X^j}`` for ``i, j < dim`` with ``ω = e^{2πi/dim}``, ordered by ``dim*i + j``."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    omega = np.exp(2j * np.pi / dim)
    z = np.diag(omega ** np.arange(dim))
    x = np.roll(np.eye(dim), 1, axis=0)
    elems = [
        omega ** (i * j) * np.linalg.matrix_power(z, i) @ np.linalg.matrix_power(x, j)
        for i in range(dim)
        for j in range(dim)
    ]
    return UnitaryOperatorBasis(np.array(elems, dtype=complex))


def embed_basis(basis: UnitaryOperatorBasis, sector: Sector) -> EmbeddedKrausSet:
    if basis.dim != sector.d_u:
        raise ShapeError(f"basis dimension {basis.dim} differs from irrep dimension {sector.d_u}")
    w = sector.copies
    ops = np.einsum("lam,gmn,lbn->gab", w, basis.elements, w.conj())
    return EmbeddedKrausSet(sector.label, ops)


def dual_channel_twirl(
    j: ChoiOperator,
    dec: SectorDecomposition,
    beta: BetaWeights,
    basis_factory=heisenberg_weyl,
) -> ChoiOperator:
    """``Σ_k (β_k/D_k) (1/D_U^2) Σ_l γ̃_l J γ̃_l^†``.

    ``dec`` must decompose ``π_out ⊗ π̄_in`` (restricted to the compact
    group) on the Choi space. ``basis_factory(D)`` supplies the unitary
    operator basis per sector; Heisenberg-Weyl by default.
    """
    if dec.dim != j.matrix.shape[0]:
        raise ShapeError("decomposition does not act on the Choi space")
    if len(beta.beta) != len(dec.sectors):
        raise ContractError("beta weights and decomposition disagree on the number of sectors")
    if not np.allclose(beta.dims, [s.dim for s in dec.sectors]):
        raise ContractError("beta weights were computed for a different decomposition")
    out = np.zeros_like(j.matrix)
    for p, s in zip(beta.weights, dec.sectors):
        out = out + p * embed_basis(basis_factory(s.d_u), s).apply(j.matrix)
    return j.replace(0.5 * (out + out.conj().T))


def kraus_sum(dec: SectorDecomposition, beta: BetaWeights, basis_factory=heisenberg_weyl) -> np.ndarray:
    """``Σ_k (β_k/D_k)(1/D_U^2) Σ_l γ̃_l^† γ̃_l``; ``≼ I`` certifies trace non-increase."""
    total = np.zeros((dec.dim, dec.dim), dtype=complex)
    for p, s in zip(beta.weights, dec.sectors):
        g = embed_basis(basis_factory(s.d_u), s).operators
        total += p * np.einsum("lba,lbc->ac", g.conj(), g) / len(g)
    return total
