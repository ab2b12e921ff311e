"""Exact Haar twirls as Hilbert-Schmidt projections onto commutants.

For a unitary representation ``π`` of a compact group, the Haar average
``∫ π(g) X π(g)^†`` is the orthogonal projection of ``X`` onto the commutant
``{Y : π(g) Y = Y π(g)}``. Two ways of spanning that commutant are offered:

* the ``t!`` permutation operators for ``U^{⊗t}`` (they are linearly
  dependent when ``d < t``, handled by a Gram pseudo-inverse);
* a numerical nullspace for arbitrary representations.

For channels the twirl acts on the Choi operator through ``π_out ⊗ π̄_in``.
The ``"gamma"`` route partially transposes the input factors first, which
turns the mixed action into the plain ``U^{⊗(t_out+t_in)}`` and lets the
permutation basis do the work.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .channels import ChoiOperator
from .errors import ContractError, ResourceGuardError, ShapeError
from .haar import haar_unitaries
from .reps import Representation, choi_representation
from .tensor import (
    TensorSpace,
    all_permutations,
    as_matrix,
    compose,
    cycle_count,
    dimension_guard,
    factorial_guard,
    inverse_permutation,
    partial_transpose,
    permutation_matrix,
)

PINV_CUTOFF = 1e-10
NULLSPACE_TOL = 1e-9
COLLECTIVE_SAMPLES = 20
COMMUTANT_SEED = 20240611
_CUSTOM_DENSE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class CommutantBasis:
    """Spanning set of a commutant with its Gram matrix ``G_ab = Tr(B_a^† B_b)``."""

    elements: np.ndarray  # (n, D, D)
    gram: np.ndarray
    gram_pinv: np.ndarray
    numerical_rank: int

    @classmethod
    def from_elements(cls, elements, gram=None, cutoff: float = PINV_CUTOFF) -> "CommutantBasis":
        elems = np.asarray(elements, dtype=complex)
        if elems.ndim != 3 or elems.shape[1] != elems.shape[2]:
            raise ShapeError("commutant elements must be a stack of square matrices")
        flat = elems.reshape(elems.shape[0], -1)
        if gram is None:
            gram = flat.conj() @ flat.T
        gram = np.asarray(gram, dtype=complex)
        pinv = np.linalg.pinv(gram, rcond=cutoff, hermitian=True)
        s = np.linalg.eigvalsh(gram)
        rank = int(np.sum(s > cutoff * max(s.max(initial=0.0), 0.0)))
        for a in (elems, gram, pinv):
            a.setflags(write=False)
        return cls(elems, gram, pinv, rank)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]


def project_onto_commutant(x, basis: CommutantBasis) -> np.ndarray:
    """``Σ_ab (G^+)_ab B_a Tr(B_b^† x)``, the HS-orthogonal projection onto ``span(basis)``."""
    x = as_matrix(x)
    if x.shape != (basis.dim, basis.dim):
        raise ShapeError(f"operand {x.shape} does not match commutant dimension {basis.dim}")
    flat = basis.elements.reshape(len(basis), -1)
    overlaps = flat.conj() @ x.reshape(-1)
    coeffs = basis.gram_pinv @ overlaps
    return (coeffs @ flat).reshape(x.shape)


def permutation_commutant_basis(d: int, t: int) -> CommutantBasis:
    """All ``t!`` operators ``P(σ)`` on ``(C^d)^{⊗t}``; ``Tr(P(σ)^† P(τ)) = d^{c(σ^{-1}τ)}``."""
    factorial_guard(t)
    dimension_guard(d**t)
    return _permutation_basis(d, t)


@lru_cache(maxsize=32)
def _permutation_basis(d: int, t: int) -> CommutantBasis:
    perms = all_permutations(t)
    space = TensorSpace(d, t)
    elems = np.stack([permutation_matrix(p, space) for p in perms])
    gram = np.array(
        [[float(d) ** cycle_count(compose(inverse_permutation(s), p)) for p in perms] for s in perms]
    )
    return CommutantBasis.from_elements(elems, gram)


def numerical_commutant(rep: Representation, seed: int = COMMUTANT_SEED) -> CommutantBasis:
    """HS-orthonormal basis of the commutant of ``rep``.

    Collective representations are constrained by 20 seeded Haar samples of
    U(d); custom ones by their declared generators.
    """
    dimension_guard(rep.dim)
    if rep.is_collective:
        return _collective_commutant(rep.d, rep.factors, seed)
    return _commutant_from_elements(list(rep.generators), np.random.default_rng(seed))


@lru_cache(maxsize=64)
def _collective_commutant(d: int, factors: tuple[str, ...], seed: int) -> CommutantBasis:
    rep = Representation(d, factors)
    rng = np.random.default_rng(seed)
    samples = rep.batch(haar_unitaries(d, COLLECTIVE_SAMPLES, rng))
    return _commutant_from_elements(list(samples), rng)


def _is_unitary(g: np.ndarray, tol: float = 1e-9) -> bool:
    return np.abs(g.conj().T @ g - np.eye(g.shape[0])).max() <= tol


def _commutant_from_elements(group: list[np.ndarray], rng: np.random.Generator) -> CommutantBasis:
    """Common nullspace of ``Y ↦ gY − Yg`` over ``group``.

    For unitary elements the commutant is closed under ``†`` and must commute
    with the Hermitian algebra element ``A = Σ r_i (g_i + g_i^†)``, so every
    solution is block diagonal in the eigenbasis of ``A``. Solving only for
    those blocks keeps the linear system small. Non-unitary generators fall
    back to the full ``D^2``-unknown system.
    """
    dim = group[0].shape[0]
    if all(_is_unitary(g) for g in group):
        coeffs = rng.standard_normal(len(group))
        a = sum(c * (g + g.conj().T) for c, g in zip(coeffs, group))
        w, v = np.linalg.eigh(a)
        blocks = _cluster(w, tol=1e-9 * max(1.0, np.abs(w).max()))
    else:
        if dim > _CUSTOM_DENSE_LIMIT:
            raise ResourceGuardError(f"non-unitary custom generators limited to dimension {_CUSTOM_DENSE_LIMIT}")
        v = np.eye(dim, dtype=complex)
        blocks = [np.arange(dim)]
    rows = np.concatenate([np.repeat(b, len(b)) for b in blocks])
    cols = np.concatenate([np.tile(b, len(b)) for b in blocks])
    n_unknown = rows.size
    col_idx = np.arange(n_unknown)

    r_acc = np.zeros((0, n_unknown), dtype=complex)
    scale = 0.0
    for g in group:
        gt = v.conj().T @ g @ v
        # column n holds gt E_pq - E_pq gt for E_pq = e_p e_q^†, row-major
        block = np.zeros((dim, dim, n_unknown), dtype=complex)
        block[:, cols, col_idx] = gt[:, rows]
        block[rows, :, col_idx] -= gt[cols, :]
        stacked = np.vstack([r_acc, block.reshape(dim * dim, n_unknown)])
        r_acc = scipy.linalg.qr(stacked, mode="r")[0][: min(stacked.shape), :]
        scale = max(scale, np.abs(gt).max())

    _, s, vh = np.linalg.svd(r_acc) if r_acc.size else (None, np.zeros(0), np.eye(n_unknown))
    s_full = np.zeros(n_unknown)
    s_full[: s.size] = s
    null = vh[s_full <= NULLSPACE_TOL * max(scale, 1.0)].conj()
    elems = np.zeros((null.shape[0], dim, dim), dtype=complex)
    for i, y in enumerate(null):
        yt = np.zeros((dim, dim), dtype=complex)
        yt[rows, cols] = y
        elems[i] = v @ yt @ v.conj().T
    return CommutantBasis.from_elements(elems)


def _cluster(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted eigenvalues whose consecutive gaps are below ``tol``."""
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tol:
            groups.append(np.arange(start, i))
            start = i
    return groups


def twirl_state(x, rep: Representation) -> np.ndarray:
    """Haar twirl ``∫ π(U) x π(U)^†`` of an operator on the representation space."""
    if rep.is_plain_power:
        basis = permutation_commutant_basis(rep.d, len(rep.factors))
    else:
        basis = numerical_commutant(rep)
    return project_onto_commutant(x, basis)


def _default_reps(j: ChoiOperator, rep_out, rep_in):
    rep_out = Representation.collective(j.d, j.t_out) if rep_out is None else rep_out
    rep_in = Representation.collective(j.d, j.t_in) if rep_in is None else rep_in
    if rep_out.dim != j.dim_out or rep_in.dim != j.dim_in:
        raise ShapeError(
            f"representations act on dimensions ({rep_out.dim}, {rep_in.dim}) but the channel "
            f"maps {j.dim_in} -> {j.dim_out}"
        )
    return rep_out, rep_in


def twirl_channel_exact(
    j: ChoiOperator,
    rep_out: Representation | None = None,
    rep_in: Representation | None = None,
    route: str = "gamma",
) -> ChoiOperator:
    """Choi operator of ``∫ T_U^out ∘ Φ ∘ T_{U^{-1}}^in dU``.

    ``route="gamma"`` needs both representations to be plain collective
    powers; ``route="direct"`` projects ``J`` onto the commutant of
    ``π_out ⊗ π̄_in`` and accepts any representation.
    """
    rep_out, rep_in = _default_reps(j, rep_out, rep_in)
    if route == "gamma":
        if not (rep_out.is_plain_power and rep_in.is_plain_power):
            raise ContractError("the gamma route requires plain collective powers on both ports")
        basis = permutation_commutant_basis(j.d, j.t_out + j.t_in)
        jg = partial_transpose(j.matrix, j.space, j.input_factors)
        out = partial_transpose(project_onto_commutant(jg, basis), j.space, j.input_factors)
    elif route == "direct":
        basis = numerical_commutant(choi_representation(rep_out, rep_in))
        out = project_onto_commutant(j.matrix, basis)
    else:
        raise ContractError(f"unknown route {route!r}; use 'gamma' or 'direct'")
    if np.allclose(j.matrix, j.matrix.conj().T, atol=1e-12):
        out = 0.5 * (out + out.conj().T)
    return j.replace(out)
