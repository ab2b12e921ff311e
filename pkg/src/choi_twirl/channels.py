"""Kraus and Choi forms of channels ``B((C^d)^{⊗t_in}) -> B((C^d)^{⊗t_out})``.

The Choi operator is ``J = (Φ ⊗ id)(ρ_ME)`` with the *unnormalized*
``ρ_ME = Σ_ij |ii><jj|``, so a trace-preserving channel has
``Tr J = d^{t_in}`` and ``Tr_out J = I``. Output factors come first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotPSDError, ShapeError
from .tensor import DEFAULT_TOL, TensorSpace, as_matrix, partial_trace


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    d: int
    t_in: int
    t_out: int
    matrix: np.ndarray
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        m = as_matrix(self.matrix, "Choi matrix")
        n = self.d ** (self.t_in + self.t_out)
        if m.shape != (n, n):
            raise ShapeError(
                f"Choi matrix for d={self.d}, t_in={self.t_in}, t_out={self.t_out} "
                f"must be {n}x{n}, got {m.shape}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim_in(self) -> int:
        return self.d**self.t_in

    @property
    def dim_out(self) -> int:
        return self.d**self.t_out

    @property
    def space(self) -> TensorSpace:
        return TensorSpace(self.d, self.t_out + self.t_in)

    @property
    def input_factors(self) -> tuple[int, ...]:
        return tuple(range(self.t_out, self.t_out + self.t_in))

    @property
    def output_factors(self) -> tuple[int, ...]:
        return tuple(range(self.t_out))

    def replace(self, matrix, notes: tuple[str, ...] | None = None) -> "ChoiOperator":
        return ChoiOperator(self.d, self.t_in, self.t_out, matrix, self.notes if notes is None else notes)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    d: int
    t_in: int
    t_out: int
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        shape = (self.d**self.t_out, self.d**self.t_in)
        ops = tuple(as_matrix(k, "Kraus operator") for k in self.kraus_ops)
        if not ops:
            raise ShapeError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != shape:
                raise ShapeError(f"Kraus operator shape {k.shape} differs from declared {shape}")
        object.__setattr__(self, "kraus_ops", ops)

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho, "rho")
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def tp_residual(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.linalg.norm(s - np.eye(s.shape[0])))


@dataclass(frozen=True)
class CPTPReport:
    is_cp: bool
    is_tp: bool
    min_eigenvalue: float
    tp_residual: float


def max_entangled(dim: int) -> np.ndarray:
    """``Σ_{i,j<dim} |ii><jj|`` (trace ``dim``, rank one)."""
    if dim < 1:
        raise ValueError("dim must be positive")
    v = np.eye(dim, dtype=complex).reshape(-1)
    return np.outer(v, v)


def choi_from_kraus(ch: KrausChannel) -> ChoiOperator:
    # (K ⊗ I) Σ_i |i>|i> is K flattened row-major
    vecs = np.stack([k.reshape(-1) for k in ch.kraus_ops], axis=1)
    return ChoiOperator(ch.d, ch.t_in, ch.t_out, vecs @ vecs.conj().T)


def kraus_from_choi(j: ChoiOperator, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Canonical Kraus set from the eigendecomposition of ``J``.

    Eigenvalues below ``tol * λ_max`` are dropped; a negative eigenvalue below
    ``-tol * max(1, λ_max)`` raises :class:`NotPSDError`.
    """
    w, v = np.linalg.eigh(0.5 * (j.matrix + j.matrix.conj().T))
    top = max(float(w[-1]), 0.0)
    if w[0] < -tol * max(1.0, top):
        raise NotPSDError(float(w[0]), tol)
    keep = w > tol * top if top > 0 else np.zeros_like(w, dtype=bool)
    ops = [np.sqrt(lam) * v[:, i].reshape(j.dim_out, j.dim_in) for i, lam in zip(np.flatnonzero(keep), w[keep])]
    if not ops:
        ops = [np.zeros((j.dim_out, j.dim_in), dtype=complex)]
    return KrausChannel(j.d, j.t_in, j.t_out, tuple(ops[::-1]))


def apply_channel(j: ChoiOperator, rho) -> np.ndarray:
    """``Φ(ρ) = Tr_in[J (I ⊗ ρ^T)]``."""
    rho = as_matrix(rho, "rho")
    if rho.shape != (j.dim_in, j.dim_in):
        raise ShapeError(f"rho must be {j.dim_in}x{j.dim_in}, got {rho.shape}")
    blocks = j.matrix.reshape(j.dim_out, j.dim_in, j.dim_out, j.dim_in)
    return np.einsum("aibj,ij->ab", blocks, rho)


def check_cp_tp(j: ChoiOperator, tol: float = DEFAULT_TOL) -> CPTPReport:
    h = 0.5 * (j.matrix + j.matrix.conj().T)
    min_eig = float(np.linalg.eigvalsh(h)[0])
    reduced = partial_trace(j.matrix, j.space, j.output_factors)
    residual = float(np.linalg.norm(reduced - np.eye(j.dim_in)))
    return CPTPReport(is_cp=min_eig >= -tol, is_tp=residual <= tol, min_eigenvalue=min_eig, tp_residual=residual)


def random_channel(d: int, t_in: int, t_out: int, rank: int | None = None, rng=None) -> KrausChannel:
    """Random CPTP channel from a Haar-like isometry (Ginibre + QR)."""
    rng = np.random.default_rng(rng)
    din, dout = d**t_in, d**t_out
    if rank is None:
        rank = din * dout
    rank = max(rank, -(-din // dout))
    g = rng.normal(size=(rank * dout, din)) + 1j * rng.normal(size=(rank * dout, din))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ops = tuple(q[k * dout : (k + 1) * dout, :] for k in range(rank))
    return KrausChannel(d, t_in, t_out, ops)


def unitary_channel(u, d: int, t: int = 1) -> KrausChannel:
    return KrausChannel(d, t, t, (as_matrix(u),))


def identity_channel(d: int, t: int = 1) -> KrausChannel:
    return KrausChannel(d, t, t, (np.eye(d**t, dtype=complex),))
