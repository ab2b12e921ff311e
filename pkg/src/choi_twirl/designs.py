"""Weighted group t-designs and the channel twirls they reproduce.

With ``t = t_in + t_out``, a weighted design ``{(G_i, w_i)}`` reconstructs
the collective channel twirl as ``[Σ_i w_i G_i^{⊗t} J^Γ G_i^{⊗t †}]^Γ``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cartan import AbelianMeasure, kak_state_twirl
from .channels import ChoiOperator
from .commutant import permutation_commutant_basis
from .errors import ContractError, ResourceGuardError, ShapeError
from .reps import Representation
from .tensor import kron_power, partial_transpose

COMPACT_TAGS = ("U", "SU")
MAX_VERIFY_T = 4
MAX_VERIFY_D = 3
BUILTIN_NAMES = ("pauli_1q_t1", "clifford_1q_t2", "clifford_1q_t3", "sl2c_product")


@dataclass(frozen=True, eq=False)
class WeightedDesign:
    elements: np.ndarray  # (n, d, d)
    weights: np.ndarray
    t: int
    group: str = "U"
    verified: bool = False
    measure: AbelianMeasure | None = field(default=None)
    name: str = "custom"

    def __post_init__(self):
        elems = np.asarray(self.elements, dtype=complex)
        if elems.ndim != 3 or elems.shape[1] != elems.shape[2]:
            raise ShapeError("design elements must be a stack of square matrices")
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.size != elems.shape[0]:
            raise ShapeError("one weight per design element required")
        if np.any(weights <= 0):
            raise ContractError("design weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ContractError(f"design weights sum to {weights.sum():.15g}, not 1")
        if np.any(np.abs(np.linalg.det(elems)) < 1e-12):
            raise ContractError("design elements must be invertible")
        if self.group not in COMPACT_TAGS and self.measure is None:
            raise ContractError(f"non-compact group {self.group!r} needs the Abelian measure it was built from")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "weights", weights)

    @property
    def d(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True)
class DesignReport:
    max_deviation: float
    passed: bool
    t: int
    tol: float


def _moment(design: WeightedDesign, t: int, xs: np.ndarray) -> np.ndarray:
    gt = np.stack([kron_power(g, t) for g in design.elements])
    return np.einsum("i,iab,nbc,idc->nad", design.weights, gt, xs, gt.conj(), optimize=True)


def _target(design: WeightedDesign, t: int, xs: np.ndarray) -> np.ndarray:
    if design.group in COMPACT_TAGS:
        basis = permutation_commutant_basis(design.d, t)
        flat = basis.elements.reshape(len(basis), -1)
        coeffs = basis.gram_pinv @ (flat.conj() @ xs.reshape(xs.shape[0], -1).T)
        return (coeffs.T @ flat).reshape(xs.shape)
    rep = Representation.collective(design.d, t)
    return np.stack([kak_state_twirl(x, rep, design.measure) for x in xs])


def verify_design(design: WeightedDesign, tol: float = 1e-10, t: int | None = None) -> DesignReport:
    """Compare the finite moment map against the exact group twirl on every matrix unit.

    Compact tags are compared with the Haar twirl; non-compact tags with the
    exact ``K A K'`` integral for the design's Abelian measure.
    """
    t = design.t if t is None else t
    if t > MAX_VERIFY_T or design.d > MAX_VERIFY_D:
        raise ResourceGuardError(f"verification limited to t <= {MAX_VERIFY_T}, d <= {MAX_VERIFY_D}")
    dim = design.d**t
    units = np.eye(dim * dim, dtype=complex).reshape(dim * dim, dim, dim)
    dev = 0.0
    for start in range(0, dim * dim, 256):
        xs = units[start : start + 256]
        dev = max(dev, float(np.abs(_moment(design, t, xs) - _target(design, t, xs)).max()))
    return DesignReport(dev, dev <= tol, t, tol)


def verified(design: WeightedDesign, tol: float = 1e-10) -> WeightedDesign:
    """Return ``design`` with its verified flag set; raises if verification fails."""
    report = verify_design(design, tol)
    if not report.passed:
        raise ContractError(f"design {design.name} fails verification at t={design.t}: deviation {report.max_deviation:.3e}")
    return replace(design, verified=True)


def design_channel_twirl(j: ChoiOperator, design: WeightedDesign) -> ChoiOperator:
    """``[Σ_i w_i G_i^{⊗t} J^Γ G_i^{⊗t †}]^Γ`` with Γ on the input factors."""
    t = j.t_in + j.t_out
    if design.t != t:
        raise ContractError(f"design order t={design.t} but the channel needs t_in + t_out = {t}")
    if design.d != j.d:
        raise ShapeError(f"design acts on C^{design.d}, channel on C^{j.d}")
    jg = partial_transpose(j.matrix, j.space, j.input_factors)
    out = _moment(design, t, jg[None])[0]
    out = partial_transpose(out, j.space, j.input_factors)
    notes = j.notes if design.verified else j.notes + (f"design {design.name} is not verified",)
    return j.replace(out, notes)


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    first = flat[np.flatnonzero(np.abs(flat) > 1e-9)[0]]
    return u * (abs(first) / first)


def single_qubit_cliffords() -> np.ndarray:
    """The 24 single-qubit Clifford unitaries modulo phase, generated by H and S."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])

    def key(u):
        r = np.round(u.reshape(-1), 8) + 0.0
        return tuple(np.column_stack([r.real, r.imag]).reshape(-1).tolist())

    start = np.eye(2, dtype=complex)
    found = {key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = _canonical_phase(g @ u)
                k = key(v)
                if k not in found:
                    found[k] = v
                    nxt.append(v)
        frontier = nxt
    return np.stack([found[k] for k in sorted(found)])


def pauli_matrices() -> np.ndarray:
    return np.array(
        [[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
        dtype=complex,
    )


def sl2c_product(measure: AbelianMeasure | None = None, t: int = 2) -> WeightedDesign:
    """``K_a A_n K_b`` over Clifford × quadrature nodes × Clifford, weights multiplied."""
    measure = AbelianMeasure.gaussian(2) if measure is None else measure
    if measure.d != 2:
        raise ShapeError("sl2c_product needs a measure on 2-dimensional Cartan parameters")
    if t > 3:
        raise ContractError("the single-qubit Clifford group is only a 3-design")
    cl = single_qubit_cliffords()
    diag = np.exp(measure.nodes)
    diag = diag / diag.max(axis=1, keepdims=True)
    elems = np.einsum("aij,nj,bjk->anbik", cl, diag, cl).reshape(-1, 2, 2)
    wc = np.full(len(cl), 1.0 / len(cl))
    weights = np.einsum("a,n,b->anb", wc, measure.weights, wc).reshape(-1)
    weights = weights / weights.sum()
    return WeightedDesign(elems, weights, t, "SL", measure=measure, name="sl2c_product")


def builtin_design(name: str, measure: AbelianMeasure | None = None) -> WeightedDesign:
    if name == "pauli_1q_t1":
        return WeightedDesign(pauli_matrices(), np.full(4, 0.25), 1, "U", name=name)
    if name in ("clifford_1q_t2", "clifford_1q_t3"):
        cl = single_qubit_cliffords()
        return WeightedDesign(cl, np.full(len(cl), 1.0 / len(cl)), int(name[-1]), "U", name=name)
    if name == "sl2c_product":
        return sl2c_product(measure)
    raise ContractError(f"unknown builtin design {name!r}; choose from {BUILTIN_NAMES}")
