# byzfed/theory/empirical.py
"""
Monte-Carlo estimates of the moments built in moments.py, used to check the
closed forms. Every estimator returns the sample mean together with its
standard error.
"""

from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from ..adversary.poisoning import corrupt_uploads
from ..core.spec import NetworkSpec
from .blockops import bvec
from .operators import OperatorTable, realize_batch

DEFAULT_BATCH = 256


class MomentEstimate(NamedTuple):
    mean: np.ndarray
    standard_error: np.ndarray
    draws: int

    def z_scores(self, exact: np.ndarray) -> np.ndarray:
        """
        |mean - exact| in standard errors; entries with zero spread must
        match to round-off.
        """
        exact = np.asarray(exact, dtype=np.float64)
        gap = np.abs(self.mean - exact)
        spread = np.where(self.standard_error > 0, self.standard_error, np.inf)
        scores = gap / spread
        return np.where((self.standard_error == 0) & (gap > 1e-9), np.inf, scores)


def _accumulate(
    sampler: Callable[[int], np.ndarray],
    draws: int,
    batch: int,
) -> MomentEstimate:
    total = None
    total_sq = None
    remaining = draws
    while remaining > 0:
        size = min(batch, remaining)
        samples = sampler(size)
        flat = samples.reshape(size, -1)
        if total is None:
            total = flat.sum(axis=0)
            total_sq = np.einsum("bi,bi->i", flat, flat)
        else:
            total += flat.sum(axis=0)
            total_sq += np.einsum("bi,bi->i", flat, flat)
        remaining -= size
    assert total is not None and total_sq is not None
    shape = samples.shape[1:]
    mean = total / draws
    variance = np.maximum(total_sq / draws - mean * mean, 0.0) * draws / max(draws - 1, 1)
    return MomentEstimate(
        mean=mean.reshape(shape),
        standard_error=np.sqrt(variance / draws).reshape(shape),
        draws=draws,
    )


def sample_selections(spec: NetworkSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """
    `size` independent draws of the diagonals of P_k = a_k S_k, as a
    (size, K, D) array.
    """
    K, D = spec.num_clients, spec.dim
    chosen = np.argsort(rng.random((size, K, D)), axis=2)[..., : spec.shared_entries]
    masks = np.zeros((size, K, D), dtype=np.bool_)
    np.put_along_axis(masks, chosen, True, axis=2)
    selected = np.argsort(rng.random((size, K)), axis=1)[:, : spec.round_size]
    active = np.zeros((size, K), dtype=np.bool_)
    np.put_along_axis(active, selected, True, axis=1)
    return (masks & active[..., None]).astype(np.float64)


def _batched_block_kron(operators: np.ndarray, block_size: int) -> np.ndarray:
    size, side, _ = operators.shape
    n = side // block_size
    d = block_size
    o5 = operators.reshape(size, n, d, n, d)
    return np.einsum("xiajc,xlbme->xilabjmce", o5, o5).reshape(size, side * side, side * side)


def empirical_operator_moment(
    table: OperatorTable,
    spec: NetworkSpec,
    rng: np.random.Generator,
    draws: int,
    *,
    batch: int = DEFAULT_BATCH,
) -> MomentEstimate:
    """E[T ⊗_b T] for the operator described by `table`."""

    def sampler(size: int) -> np.ndarray:
        operators = realize_batch(table, sample_selections(spec, rng, size))
        return _batched_block_kron(operators, spec.dim)

    return _accumulate(sampler, draws, batch)


def _regressors(spec: NetworkSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Stacked X_n X_n^T-ready inputs: (size, (K+1)D) with the server block at zero."""
    inputs = rng.standard_normal((size, spec.num_clients, spec.dim))
    inputs *= np.sqrt(spec.input_variances)[None, :, None]
    return np.concatenate([np.zeros((size, 1, spec.dim)), inputs], axis=1)


def empirical_input_covariance(
    spec: NetworkSpec,
    rng: np.random.Generator,
    draws: int,
    *,
    batch: int = DEFAULT_BATCH,
) -> MomentEstimate:
    """E[X_n X_n^T] = bdiag{0, x_1 x_1^T, ..., x_K x_K^T} in expectation."""
    K, D = spec.num_clients, spec.dim
    block = np.kron(np.eye(K + 1), np.ones((D, D)))

    def sampler(size: int) -> np.ndarray:
        x = _regressors(spec, rng, size).reshape(size, -1)
        return np.einsum("bi,bj->bij", x, x) * block

    return _accumulate(sampler, draws, batch)


def empirical_fourth_moment(
    spec: NetworkSpec,
    rng: np.random.Generator,
    draws: int,
    *,
    batch: int = DEFAULT_BATCH,
) -> MomentEstimate:
    """E[X X^T ⊗_b X X^T]."""
    K, D = spec.num_clients, spec.dim
    block = np.kron(np.eye(K + 1), np.ones((D, D)))

    def sampler(size: int) -> np.ndarray:
        x = _regressors(spec, rng, size).reshape(size, -1)
        outer = np.einsum("bi,bj->bij", x, x) * block
        return _batched_block_kron(outer, D)

    return _accumulate(sampler, draws, batch)


def empirical_phi_nu(
    spec: NetworkSpec,
    rng: np.random.Generator,
    draws: int,
    *,
    batch: int = DEFAULT_BATCH,
) -> MomentEstimate:
    """bvec E[X ν ν^T X^T]."""

    def sampler(size: int) -> np.ndarray:
        x = _regressors(spec, rng, size)
        noise = rng.standard_normal((size, spec.num_clients)) * np.sqrt(spec.noise_variances)
        v = x.copy()
        v[:, 1:] *= noise[..., None]
        v = v.reshape(size, -1)
        return np.stack([bvec(np.outer(row, row), spec.dim) for row in v])

    return _accumulate(sampler, draws, batch)


def empirical_attack_moment(
    spec: NetworkSpec,
    rng: np.random.Generator,
    draws: int,
    *,
    batch: int = DEFAULT_BATCH,
) -> MomentEstimate:
    """
    Diagonal of E[β τ δ (β τ δ)^T], laid out like Ω_δ: zeros for the server
    then the K client blocks.
    """
    clients = np.arange(spec.num_clients)
    attack = spec.attack

    def sampler(size: int) -> np.ndarray:
        out = np.zeros((size, spec.num_clients + 1, spec.dim))
        for b in range(size):
            zero = np.zeros((spec.num_clients, spec.dim))
            out[b, 1:] = corrupt_uploads(zero, clients, attack, rng) ** 2
        return out.reshape(size, -1)

    return _accumulate(sampler, draws, batch)


__all__ = [
    "MomentEstimate",
    "empirical_attack_moment",
    "empirical_fourth_moment",
    "empirical_input_covariance",
    "empirical_operator_moment",
    "empirical_phi_nu",
    "sample_selections",
]
