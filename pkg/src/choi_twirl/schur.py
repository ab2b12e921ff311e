"""Isotypic decomposition of a representation and its two Schur operator bases.

Each sector ``k`` is stored as ``D_C`` isometries ``W_λ : C^{D_U} -> C^D``,
one per copy of the irrep, aligned so that the group acts identically on
every copy: ``π(g) W_λ = W_λ ρ_k(g)``. In terms of these

* ``Λ_k^{λ1 λ2} = W_{λ1} W_{λ2}^†`` spans the commutant block,
* ``Π_k^{m1 m2} = Σ_λ W_λ e_{m1} e_{m2}^† W_λ^†`` spans the group-algebra block,
* ``Π_k = Σ_λ W_λ W_λ^†`` is the isotypic projector.

The copies are found without any Young-diagram machinery: a random Hermitian
element of the commutant has, generically, one eigenspace per irrep copy;
copies of the same irrep are linked by nonzero commutant elements, which
also serve as the intertwiners that align them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .commutant import CommutantBasis, _cluster, numerical_commutant, permutation_commutant_basis
from .errors import DecompositionError
from .haar import haar_unitaries
from .reps import Representation
from .tensor import as_matrix

DECOMPOSE_SEED = 7
MAX_RETRIES = 5
_LINK_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Sector:
    label: int
    d_u: int
    d_c: int
    copies: np.ndarray  # (d_c, D, d_u)
    projector: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.projector is None:
            w = self.copies
            object.__setattr__(self, "projector", np.einsum("lam,lbm->ab", w, w.conj()))

    @property
    def dim(self) -> int:
        """``D_k = D_U · D_C``, the trace of the isotypic projector."""
        return self.d_u * self.d_c

    @cached_property
    def lambda_basis(self) -> np.ndarray:
        """``(d_c, d_c, D, D)`` array of ``Λ^{λ1 λ2}``."""
        w = self.copies
        return np.einsum("lam,kbm->lkab", w, w.conj())

    @cached_property
    def pi_basis(self) -> np.ndarray:
        """``(d_u, d_u, D, D)`` array of ``Π^{m1 m2}``."""
        w = self.copies
        return np.einsum("lam,lbn->mnab", w, w.conj())

    def project(self, x) -> np.ndarray:
        """Sector-``k`` part of the Haar twirl: ``(1/D_U) Σ Tr(x Λ^{λ1λ2 †}) Λ^{λ1λ2}``."""
        w = self.copies
        c = np.einsum("lam,ab,kbm->lk", w.conj(), x, w)
        return np.einsum("lk,lam,kbm->ab", c, w, w.conj()) / self.d_u

    def embed(self, gamma) -> np.ndarray:
        """``Σ_{m1 m2} γ_{m1 m2} Π^{m1 m2} = Σ_λ W_λ γ W_λ^†``."""
        gamma = as_matrix(gamma)
        w = self.copies
        return np.einsum("lam,mn,lbn->ab", w, gamma, w.conj())


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    sectors: tuple[Sector, ...]
    rep: Representation
    commutant: CommutantBasis

    @property
    def dim(self) -> int:
        return self.commutant.dim

    @property
    def dimensions(self) -> list[tuple[int, int]]:
        return [(s.d_u, s.d_c) for s in self.sectors]

    def twirl(self, x) -> np.ndarray:
        """Haar twirl reconstructed sector by sector from the Λ basis."""
        x = as_matrix(x)
        return sum(s.project(x) for s in self.sectors)


def _commutant_for(rep: Representation) -> CommutantBasis:
    if rep.is_plain_power:
        perm = permutation_commutant_basis(rep.d, len(rep.factors))
        # orthonormalize the possibly dependent permutation span
        flat = perm.elements.reshape(len(perm), -1)
        u, s, vh = np.linalg.svd(flat.T, full_matrices=False)
        keep = s > 1e-10 * s[0]
        return CommutantBasis.from_elements(u[:, keep].T.reshape(-1, perm.dim, perm.dim))
    return numerical_commutant(rep)


def decompose(rep: Representation, seed: int | None = DECOMPOSE_SEED) -> SectorDecomposition:
    """Split ``rep`` into isotypic sectors with aligned irrep copies.

    Retries with fresh randomness when a draw is degenerate; raises
    :class:`DecompositionError` after ``MAX_RETRIES`` failed attempts.
    """
    basis = _commutant_for(rep)
    rng = np.random.default_rng(seed)
    last = "no attempt"
    for _ in range(MAX_RETRIES):
        try:
            sectors = _attempt(basis, rng)
        except _Degenerate as exc:
            last = str(exc)
            continue
        return SectorDecomposition(tuple(sectors), rep, basis)
    raise DecompositionError(f"block diagonalization failed after {MAX_RETRIES} retries: {last}")


class _Degenerate(Exception):
    pass


def _attempt(basis: CommutantBasis, rng: np.random.Generator) -> list[Sector]:
    elems = basis.elements
    dim = basis.dim
    n = len(basis)
    r = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.tensordot(r, elems, axes=1)
    h = x + x.conj().T
    w, v = np.linalg.eigh(h)
    spaces = [v[:, idx] for idx in _cluster(w, tol=1e-8 * max(1.0, np.abs(w).max()))]

    # copies a, b lie in the same sector iff some commutant element links them
    parent = list(range(len(spaces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(len(spaces)):
        for b in range(a + 1, len(spaces)):
            if spaces[a].shape[1] != spaces[b].shape[1]:
                continue
            link = np.einsum("xm,nxy,yk->nmk", spaces[b].conj(), elems, spaces[a])
            if np.abs(link).max() > _LINK_TOL:
                parent[find(b)] = find(a)

    groups: dict[int, list[int]] = {}
    for i in range(len(spaces)):
        groups.setdefault(find(i), []).append(i)

    if sum(len(g) ** 2 for g in groups.values()) != basis.numerical_rank:
        raise _Degenerate("sector multiplicities do not match the commutant dimension")

    sectors = []
    for members in groups.values():
        ref = spaces[members[0]]
        d_u = ref.shape[1]
        copies = [ref]
        for b in members[1:]:
            y = np.tensordot(rng.standard_normal(n) + 1j * rng.standard_normal(n), elems, axes=1)
            t = spaces[b].conj().T @ y @ ref
            c = np.real(np.trace(t.conj().T @ t)) / d_u
            if c < 1e-10 or np.abs(t.conj().T @ t - c * np.eye(d_u)).max() > 1e-7 * max(c, 1.0):
                raise _Degenerate("intertwiner between copies is not a scaled unitary")
            copies.append(spaces[b] @ t / np.sqrt(c))
        sectors.append(np.stack(copies))

    if sum(s.shape[0] * s.shape[2] for s in sectors) != dim:
        raise _Degenerate("sector dimensions do not add up")

    def order_key(w_stack):
        proj_diag = np.real(np.einsum("lam,lam->a", w_stack, w_stack.conj()))
        return (-w_stack.shape[2], -w_stack.shape[0], tuple(-np.round(proj_diag, 8)))

    sectors.sort(key=order_key)
    return [Sector(k, s.shape[2], s.shape[0], s) for k, s in enumerate(sectors)]


@dataclass(frozen=True)
class DualityReport:
    completeness: float
    projector: float
    orthogonality: float
    lambda_covariance: float
    pi_commutation: float
    lambda_inner: float
    pi_inner: float
    diagonal_sums: float
    dimension_mismatch: int

    @property
    def max_violation(self) -> float:
        return max(
            self.completeness,
            self.projector,
            self.orthogonality,
            self.lambda_covariance,
            self.pi_commutation,
            self.lambda_inner,
            self.pi_inner,
            self.diagonal_sums,
            float(self.dimension_mismatch),
        )

    def passed(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol


def verify_duality(dec: SectorDecomposition, rep: Representation | None = None, n_checks: int = 10, seed: int = 0) -> DualityReport:
    """Largest violation of every sector invariant, over ``n_checks`` random group samples."""
    rep = dec.rep if rep is None else rep
    dim = dec.dim
    eye = np.eye(dim)
    projs = [s.projector for s in dec.sectors]

    completeness = np.abs(sum(projs) - eye).max()
    projector = max(max(np.abs(p @ p - p).max(), np.abs(p - p.conj().T).max()) for p in projs)
    orthogonality = max(
        (np.abs(projs[a] @ projs[b]).max() for a in range(len(projs)) for b in range(len(projs)) if a != b),
        default=0.0,
    )

    if rep.is_collective:
        group = rep.batch(haar_unitaries(rep.d, n_checks, np.random.default_rng(seed)))
    else:
        group = np.stack(rep.generators)

    lam_cov = pi_comm = lam_inner = pi_inner = diag = 0.0
    comm = dec.commutant.elements
    for s in dec.sectors:
        lam = s.lambda_basis.reshape(-1, dim, dim)
        pib = s.pi_basis.reshape(-1, dim, dim)
        for g in group:
            lam_cov = max(lam_cov, np.abs(g @ lam - lam @ g).max())
        for c in comm:
            pi_comm = max(pi_comm, np.abs(c @ pib - pib @ c).max())
        lam_gram = np.einsum("iab,jab->ij", lam.conj(), lam)
        pi_gram = np.einsum("iab,jab->ij", pib.conj(), pib)
        lam_inner = max(lam_inner, np.abs(lam_gram - s.d_u * np.eye(s.d_c**2)).max())
        pi_inner = max(pi_inner, np.abs(pi_gram - s.d_c * np.eye(s.d_u**2)).max())
        diag = max(
            diag,
            np.abs(np.einsum("llab->ab", s.lambda_basis) - s.projector).max(),
            np.abs(np.einsum("mmab->ab", s.pi_basis) - s.projector).max(),
        )
    # cross-sector Λ orthogonality
    for a, sa in enumerate(dec.sectors):
        for sb in dec.sectors[a + 1 :]:
            cross = np.einsum("ijab,klab->ijkl", sa.lambda_basis.conj(), sb.lambda_basis)
            lam_inner = max(lam_inner, np.abs(cross).max())

    mismatch = abs(sum(s.dim for s in dec.sectors) - dim)
    return DualityReport(
        float(completeness),
        float(projector),
        float(orthogonality),
        float(lam_cov),
        float(pi_comm),
        float(lam_inner),
        float(pi_inner),
        float(diag),
        int(mismatch),
    )


def subspace_distance(p, q) -> float:
    """Spectral norm of the difference of two orthogonal projectors."""
    return float(np.linalg.norm(as_matrix(p) - as_matrix(q), 2))


def with_corrupted_projector(dec: SectorDecomposition, index: int, noise) -> SectorDecomposition:
    """Copy of ``dec`` whose sector ``index`` projector has ``noise`` added (for detector checks)."""
    sectors = list(dec.sectors)
    s = sectors[index]
    sectors[index] = replace(s, projector=s.projector + as_matrix(noise))
    return replace(dec, sectors=tuple(sectors))
