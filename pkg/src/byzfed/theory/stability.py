# byzfed/theory/stability.py
import logging
import math

import numpy as np
import scipy.linalg

from ..core.error import DegenerateConfigError
from ..core.spec import NetworkSpec
from .moments import KronBundle
from .options import TheoryOptions
from .recursion import build_F, spectral_radius

logger = logging.getLogger(__name__)

# imaginary parts below this fraction of the norm count as real
REAL_EIGENVALUE_TOLERANCE = 1e-9


def mean_stability_bound(spec: NetworkSpec) -> float:
    """2 / max_k sigma_k^2; independent of K, M and the attack."""
    return 2.0 / float(np.max(spec.input_variances))


def _pair_blocks(bundle: KronBundle):
    """
    Yields (K diagonal, H block) for every block pair; both matrices map a
    pair onto itself.
    """
    d2 = bundle.dim * bundle.dim
    k_diag = bundle.k_mat.diagonal()
    h = bundle.h.tocsr()
    for p in range(bundle.num_blocks**2):
        lo, hi = p * d2, (p + 1) * d2
        k = k_diag[lo:hi]
        if h.indptr[hi] == h.indptr[lo]:
            yield k, None
        else:
            yield k, h[lo:hi, lo:hi].toarray()


def _pair_spectrum(k: np.ndarray, h_block: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues of K^{-1} H and of D = [[K/2, -H/2], [I, 0]] restricted to
    one pair. With K = k I the 2x2 reduction gives the roots of
    lambda^2 - (k/2) lambda + h/2 for every eigenvalue h of H.
    """
    d2 = k.shape[0]
    if h_block is None:
        h_block = np.zeros((d2, d2))
    if np.ptp(k) <= 1e-12 * max(1.0, float(np.max(np.abs(k)))):
        k0 = float(k[0])
        if np.count_nonzero(h_block - np.diag(np.diag(h_block))) == 0:
            h_values = np.diag(h_block).copy()
        else:
            h_values = scipy.linalg.eigvalsh(h_block)
        if k0 == 0.0:
            if np.any(h_values != 0.0):
                raise DegenerateConfigError("K is singular on a block pair where H is not")
            return np.empty(0), np.empty(0, dtype=np.complex128)
        discriminant = (k0 * k0 / 4 - 2 * h_values).astype(np.complex128)
        root = np.sqrt(discriminant)
        return h_values / k0, np.concatenate([(k0 / 2 + root) / 2, (k0 / 2 - root) / 2])

    if np.any(k == 0.0):
        raise DegenerateConfigError("K has a partially singular block pair")
    ratio = scipy.linalg.eigvals(h_block / k[:, None]).real
    d_matrix = np.block([[np.diag(k) / 2, -h_block / 2], [np.eye(d2), np.zeros((d2, d2))]])
    return ratio, scipy.linalg.eigvals(d_matrix)


def ms_stability_bound(bundle: KronBundle, *, options: TheoryOptions | None = None) -> float:
    """
    min{1 / lambda_max(K^{-1} H), 1 / max{real eigenvalues of D, 0}},
    computed on the pairs where K is nonsingular. The bound is sufficient:
    rho(F) < 1 below it.
    """
    if options is None:
        options = TheoryOptions()

    ratio_max = 0.0
    d_eigenvalues: list[np.ndarray] = []
    scale = 1.0
    for k, h_block in _pair_blocks(bundle):
        ratio, eigenvalues = _pair_spectrum(k, h_block)
        if ratio.size:
            ratio_max = max(ratio_max, float(np.max(ratio)))
        if eigenvalues.size:
            d_eigenvalues.append(eigenvalues)
            scale = max(scale, float(np.max(np.abs(k))) / 2)
            if h_block is not None:
                scale = max(scale, float(np.max(np.abs(h_block))) / 2)

    real_max = 0.0
    if d_eigenvalues:
        values = np.concatenate(d_eigenvalues)
        real = values[np.abs(values.imag) <= REAL_EIGENVALUE_TOLERANCE * scale].real
        if real.size:
            real_max = max(0.0, float(np.max(real)))

    first = 1.0 / ratio_max if ratio_max > 0 else math.inf
    second = 1.0 / real_max if real_max > 0 else math.inf
    bound = min(first, second)
    if not math.isfinite(bound):
        raise DegenerateConfigError("mean-square stability bound is unbounded: K and H vanish")
    logger.debug("mean-square bound terms: 1/lambda_max(K^-1 H)=%.6g, 1/lambda(D)=%.6g", first, second)

    if options.verify_bound and bundle.side <= options.direct_limit:
        rho = spectral_radius(
            build_F(bundle, 0.99 * bound, small_step_approx=options.small_step_approx),
            dense_limit=options.dense_limit,
        )
        if rho >= 1.0:
            logger.warning(
                "rho(F) = %.9g >= 1 just below the mean-square bound %.6g", rho, bound
            )
    return bound


__all__ = [
    "REAL_EIGENVALUE_TOLERANCE",
    "mean_stability_bound",
    "ms_stability_bound",
]
