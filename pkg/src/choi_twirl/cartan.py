"""Channel twirls over SL(d, C) through the Cartan decomposition ``G = K A K'``.

The compact parts ``K, K'`` are Haar-averaged over SU(d). The Abelian part
``A(a) = diag(e^{a_1}, ..., e^{a_d})`` (``Σ a_i = 0``) is averaged against a
finite normalized measure and enters through spectrally normalized images
``π(A)/||π(A)||``, which keeps every conjugation trace non-increasing.

:func:`cartan_channel_twirl` evaluates the weighted sector formula
``Σ_k (β_k / D_k) P_k(J)`` with ``β_k = Tr(M Π_k)``, ``M = ∫ π(A_n)^2 dA``
and ``D_k = D_U^k D_C^k``. :func:`kak_channel_twirl` evaluates the
``K A K'`` integral itself, ``P(∫ π(A_n) P(J) π(A_n) dA)`` with ``P`` the
compact twirl. The two coincide when the measure is a point mass at
``a = 0`` and in general share the same trace, but they are different maps
otherwise; the sampled estimator in :mod:`choi_twirl.montecarlo` follows the
integral.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .channels import ChoiOperator
from .commutant import twirl_state
from .errors import ContractError, ShapeError
from .reps import Representation, choi_representation
from .schur import SectorDecomposition, decompose
from .tensor import partial_transpose

COMPACT_GROUPS = ("SU", "U")
DEFAULT_SIGMA = 0.5
DEFAULT_CUTOFF = 2.0
DEFAULT_NODES = 21


@dataclass(frozen=True)
class CartanGroupSpec:
    d: int
    group: str = "SL"
    compact: str = "SU"

    def __post_init__(self):
        if self.group not in ("SL",) + COMPACT_GROUPS:
            raise ContractError(f"unsupported group {self.group!r}; use SL, SU or U")

    @property
    def is_compact(self) -> bool:
        return self.group in COMPACT_GROUPS

    def abelian(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.d,):
            raise ShapeError(f"Cartan parameter must have {self.d} entries")
        return np.diag(np.exp(a)).astype(complex)


@dataclass(frozen=True, eq=False)
class AbelianMeasure:
    """Finite normalized measure on the Cartan parameters ``a`` (one row per node)."""

    nodes: np.ndarray
    weights: np.ndarray
    description: str = "custom"

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if nodes.shape[0] != weights.size:
            raise ShapeError("one weight per node required")
        if np.any(weights <= 0):
            raise ContractError("measure weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ContractError(f"measure is not normalized: weights sum to {weights.sum():.15g}")
        if np.abs(nodes.sum(axis=1)).max() > 1e-12:
            raise ContractError("Cartan parameters must sum to zero (unit determinant)")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def d(self) -> int:
        return self.nodes.shape[1]

    @property
    def is_trivial(self) -> bool:
        return bool(np.all(self.nodes == 0.0))

    @classmethod
    def point(cls, d: int) -> "AbelianMeasure":
        return cls(np.zeros((1, d)), np.ones(1), "point")

    @classmethod
    def gaussian(
        cls, d: int, sigma: float = DEFAULT_SIGMA, cutoff: float = DEFAULT_CUTOFF, n_nodes: int = DEFAULT_NODES
    ) -> "AbelianMeasure":
        """Truncated Gaussian in ``τ ∈ [-cutoff, cutoff]`` along ``a = τ (1/2, 0, ..., 0, -1/2)``.

        Gauss-Legendre nodes, weights multiplied by the Gaussian density and
        renormalized to one.
        """
        if sigma <= 0 or cutoff <= 0 or n_nodes < 1:
            raise ContractError("gaussian measure needs sigma > 0, cutoff > 0, nodes >= 1")
        if d < 2:
            raise ContractError("a non-trivial Cartan direction needs d >= 2")
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        tau = cutoff * x
        w = w * np.exp(-0.5 * (tau / sigma) ** 2)
        direction = np.zeros(d)
        direction[0], direction[-1] = 0.5, -0.5
        return cls(np.outer(tau, direction), w / w.sum(), f"gaussian:{sigma}:{cutoff}:{n_nodes}")

    @classmethod
    def from_json(cls, data: dict) -> "AbelianMeasure":
        return cls(np.asarray(data["nodes"], dtype=float), np.asarray(data["weights"], dtype=float), "file")

    @classmethod
    def parse(cls, text: str, d: int) -> "AbelianMeasure":
        """``gaussian[:SIGMA[:CUTOFF[:NODES]]]``, ``point`` or ``file:PATH``."""
        kind, _, rest = text.partition(":")
        if kind == "point":
            return cls.point(d)
        if kind == "gaussian":
            parts = [p for p in rest.split(":") if p]
            sigma = float(parts[0]) if len(parts) > 0 else DEFAULT_SIGMA
            cutoff = float(parts[1]) if len(parts) > 1 else DEFAULT_CUTOFF
            nodes = int(parts[2]) if len(parts) > 2 else DEFAULT_NODES
            return cls.gaussian(d, sigma, cutoff, nodes)
        if kind == "file":
            return cls.from_json(json.loads(Path(rest).read_text()))
        raise ContractError(f"unknown measure {text!r}")

    def to_json(self) -> dict:
        return {"nodes": self.nodes.tolist(), "weights": self.weights.tolist(), "description": self.description}


@dataclass(frozen=True)
class BetaWeights:
    beta: np.ndarray
    dims: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """``β_k / D_k``; a probability vector only in the compact limit."""
        return self.beta / self.dims

    @property
    def weight_sum(self) -> float:
        return float(self.weights.sum())


def normalize_abelian(a, rep: Representation) -> np.ndarray:
    """``π(A(a)) / ||π(A(a))||`` in spectral norm (a positive diagonal matrix)."""
    a = np.asarray(a, dtype=float)
    if abs(a.sum()) > 1e-12:
        raise ContractError("Cartan parameters must sum to zero")
    img = rep(np.diag(np.exp(a)))
    return img / np.abs(np.diag(img)).max()


def abelian_second_moment(measure: AbelianMeasure, rep: Representation) -> np.ndarray:
    """``Σ_j w_j (π(A_j)/||π(A_j)||)^2``."""
    if measure.d != rep.d:
        raise ShapeError("measure and representation have different local dimension")
    return sum(w * np.linalg.matrix_power(normalize_abelian(a, rep), 2) for a, w in zip(measure.nodes, measure.weights))


def beta_weights(measure: AbelianMeasure, rep: Representation, dec: SectorDecomposition) -> BetaWeights:
    m = abelian_second_moment(measure, rep)
    beta = np.array([np.real(np.trace(m @ s.projector.conj().T)) for s in dec.sectors])
    dims = np.array([s.dim for s in dec.sectors], dtype=float)
    return BetaWeights(beta, dims)


@lru_cache(maxsize=64)
def _decompose_collective(d: int, factors: tuple[str, ...]) -> SectorDecomposition:
    return decompose(Representation(d, factors))


def sector_decomposition(rep: Representation) -> SectorDecomposition:
    """Cached :func:`decompose` for collective representations."""
    if rep.is_collective:
        return _decompose_collective(rep.d, rep.factors)
    return decompose(rep)


def _check(j: ChoiOperator, spec: CartanGroupSpec, measure: AbelianMeasure) -> None:
    if spec.d != j.d or measure.d != j.d:
        raise ShapeError(f"group/measure dimension ({spec.d}, {measure.d}) differs from channel d={j.d}")
    if spec.is_compact and not measure.is_trivial:
        raise ContractError(f"compact group {spec.group} has a trivial Abelian part; use the point measure")


def cartan_channel_twirl(
    j: ChoiOperator, spec: CartanGroupSpec, measure: AbelianMeasure, route: str = "direct"
) -> ChoiOperator:
    """Weighted sector projection ``Σ_k (β_k/D_k) P_k(J)``.

    ``route="direct"`` uses the sectors of ``U^{⊗t_out} ⊗ Ū^{⊗t_in}``;
    ``route="gamma"`` uses those of ``U^{⊗(t_out+t_in)}`` on ``J^Γ`` and
    transposes back.
    """
    _check(j, spec, measure)
    if route == "direct":
        rep = choi_representation(Representation.collective(j.d, j.t_out), Representation.collective(j.d, j.t_in))
        x = j.matrix
    elif route == "gamma":
        rep = Representation.collective(j.d, j.t_out + j.t_in)
        x = partial_transpose(j.matrix, j.space, j.input_factors)
    else:
        raise ContractError(f"unknown route {route!r}; use 'gamma' or 'direct'")
    dec = sector_decomposition(rep)
    beta = beta_weights(measure, rep, dec)
    out = sum(p * s.project(x) for p, s in zip(beta.weights, dec.sectors))
    if route == "gamma":
        out = partial_transpose(out, j.space, j.input_factors)
    return j.replace(0.5 * (out + out.conj().T))


def kak_state_twirl(x, rep: Representation, measure: AbelianMeasure) -> np.ndarray:
    """``∫ π(K A_n K') x π(K A_n K')^† dK dA dK'`` for a collective ``rep``, evaluated exactly."""
    inner = twirl_state(x, rep)
    mid = 0
    for a, w in zip(measure.nodes, measure.weights):
        n = normalize_abelian(a, rep)
        mid = mid + w * (n @ inner @ n)
    return twirl_state(mid, rep)


def kak_channel_twirl(j: ChoiOperator, spec: CartanGroupSpec, measure: AbelianMeasure) -> ChoiOperator:
    """Choi operator of the ``K A K'`` integral under ``π_out ⊗ π̄_in``."""
    _check(j, spec, measure)
    rep = choi_representation(Representation.collective(j.d, j.t_out), Representation.collective(j.d, j.t_in))
    out = kak_state_twirl(j.matrix, rep, measure)
    return j.replace(0.5 * (out + out.conj().T))
