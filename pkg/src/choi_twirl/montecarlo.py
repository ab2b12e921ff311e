"""Sampling estimators of channel twirls, used as an independent oracle.

Nothing here touches commutants or sector decompositions: each estimator
draws group elements, conjugates the Choi operator and averages.

Reproducibility: the ``n`` samples are split into ``batches`` batches. With
``streams == 1`` a single generator seeded by ``seed`` draws every batch in
order (the reference mode). With ``streams == P`` the seed is split by
:class:`numpy.random.SeedSequence` into ``P`` child streams and stream ``s``
draws the batches ``b ≡ s (mod P)``; results then depend on
``(seed, n, P)`` only, never on the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cartan import AbelianMeasure, CartanGroupSpec
from .channels import ChoiOperator
from .errors import ContractError, ShapeError
from .haar import haar_special_unitaries, haar_unitaries
from .reps import Representation, choi_representation

DEFAULT_BATCHES = 20
_CHUNK = 4096

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class SampleEstimate:
    mean: np.ndarray
    n_samples: int
    stderr_proxy: float
    batch_means: np.ndarray


def thread_cap() -> int | None:
    value = os.environ.get("CHOI_TWIRL_THREADS")
    if not value:
        return None
    try:
        return max(1, int(value))
    except ValueError:
        return None


def _batch_sizes(n: int, batches: int) -> list[int]:
    batches = max(1, min(batches, n))
    base, extra = divmod(n, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def _conjugation_sum(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.einsum("nab,bc,ndc->ad", g, x, g.conj(), optimize=True)


def _estimate(x: np.ndarray, sampler: Sampler, n: int, seed: int, streams: int, batches: int) -> SampleEstimate:
    if n < 1:
        raise ContractError("need at least one sample")
    if streams < 1:
        raise ContractError("need at least one stream")
    sizes = _batch_sizes(n, batches)

    def run_stream(rng: np.random.Generator, which: list[int]) -> dict[int, np.ndarray]:
        out = {}
        for b in which:
            acc = np.zeros_like(x)
            left = sizes[b]
            while left:
                k = min(left, _CHUNK)
                acc += _conjugation_sum(x, sampler(rng, k))
                left -= k
            out[b] = acc / sizes[b]
        return out

    if streams == 1:
        results = run_stream(np.random.default_rng(seed), list(range(len(sizes))))
    else:
        children = np.random.SeedSequence(seed).spawn(streams)
        plan = [list(range(s, len(sizes), streams)) for s in range(streams)]
        workers = min(streams, thread_cap() or streams)
        results = {}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(lambda a: run_stream(np.random.default_rng(a[0]), a[1]), zip(children, plan)):
                results.update(part)

    means = np.stack([results[b] for b in range(len(sizes))])
    means = 0.5 * (means + means.conj().transpose(0, 2, 1))
    w = np.asarray(sizes, dtype=float) / n
    mean = np.tensordot(w, means, axes=1)
    nb = len(sizes)
    if nb > 1:
        spread = np.sum(np.abs(means - means.mean(axis=0)) ** 2)
        stderr = float(np.sqrt(spread / (nb * (nb - 1))))
    else:
        stderr = float("nan")
    return SampleEstimate(mean, n, stderr, means)


def _choi_rep(j: ChoiOperator, rep_out, rep_in) -> Representation:
    rep_out = Representation.collective(j.d, j.t_out) if rep_out is None else rep_out
    rep_in = Representation.collective(j.d, j.t_in) if rep_in is None else rep_in
    if rep_out.dim != j.dim_out or rep_in.dim != j.dim_in:
        raise ShapeError("representation dimensions do not match the channel")
    rep = choi_representation(rep_out, rep_in)
    if not rep.is_collective:
        raise ContractError("Monte-Carlo sampling needs collective representations")
    return rep


def mc_channel_twirl(
    j: ChoiOperator,
    rep_out: Representation | None = None,
    rep_in: Representation | None = None,
    n: int = 100_000,
    seed: int = 0,
    streams: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> SampleEstimate:
    """Sample mean of ``(π_out(U) ⊗ π̄_in(U)) J (...)^†`` over Haar U(d)."""
    rep = _choi_rep(j, rep_out, rep_in)

    def sampler(rng, k):
        return rep.batch(haar_unitaries(j.d, k, rng))

    return _estimate(j.matrix, sampler, n, seed, streams, batches)


def mc_state_twirl(x, rep: Representation, n: int = 100_000, seed: int = 0, streams: int = 1) -> SampleEstimate:
    """Sample mean of ``π(U) x π(U)^†``."""
    x = np.asarray(x, dtype=complex)

    def sampler(rng, k):
        return rep.batch(haar_unitaries(rep.d, k, rng))

    return _estimate(x, sampler, n, seed, streams, DEFAULT_BATCHES)


def mc_cartan_twirl(
    j: ChoiOperator,
    spec: CartanGroupSpec,
    measure: AbelianMeasure,
    n: int = 100_000,
    seed: int = 0,
    streams: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> SampleEstimate:
    """Sample mean over ``G = K A_n K'`` with ``K, K'`` Haar on SU(d) and ``A`` from ``measure``.

    ``A_n = A / ||A||`` (spectral norm), so each sampled conjugation is trace
    non-increasing.
    """
    if spec.d != j.d or measure.d != j.d:
        raise ShapeError("group/measure dimension differs from the channel")
    if abs(measure.weights.sum() - 1.0) > 1e-12:
        raise ContractError("Abelian measure is not normalized")
    rep = _choi_rep(j, None, None)
    diag = np.exp(measure.nodes)
    diag = diag / diag.max(axis=1, keepdims=True)
    p = measure.weights

    def sampler(rng, k):
        kk = haar_special_unitaries(j.d, k, rng)
        kp = haar_special_unitaries(j.d, k, rng)
        idx = rng.choice(len(p), size=k, p=p)
        g = (kk * diag[idx][:, None, :]) @ kp
        return rep.batch(g)

    return _estimate(j.matrix, sampler, n, seed, streams, batches)
