# byzfed/theory/recursion.py
"""
The mean-square recursion of the extended deviation.

With psi_n = bvec E[w~_e w~_e^T], one round maps

    psi_{n+1} = F psi_n + mu^2 phi + omega,
    F = Q_B (I - mu K + mu^2 H) Q_A,

so the weighted deviation E||w~_{e,n}||^2_sigma is sigma^T psi_n.
"""

import logging

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as spla

from ..core.error import DivergenceError, NumericError
from .moments import KronBundle
from .options import TheoryOptions

logger = logging.getLogger(__name__)


def middle_matrix(bundle: KronBundle, mu: float, *, small_step_approx: bool = False) -> sparse.csr_matrix:
    """I - mu K + mu^2 H, or I - mu K in small-stepsize mode."""
    middle = sparse.identity(bundle.side, format="csr") - mu * bundle.k_mat
    if not small_step_approx:
        middle = middle + (mu * mu) * bundle.h
    return middle.tocsr()


def build_F(bundle: KronBundle, mu: float, *, small_step_approx: bool = False) -> sparse.csr_matrix:
    middle = middle_matrix(bundle, mu, small_step_approx=small_step_approx)
    return (bundle.q_b @ middle @ bundle.q_a).tocsr()


def f_operator(bundle: KronBundle, mu: float, *, small_step_approx: bool = False) -> spla.LinearOperator:
    """F as matrix-vector products only, for sides where the product is too dense."""
    middle = middle_matrix(bundle, mu, small_step_approx=small_step_approx)
    q_a, q_b = bundle.q_a, bundle.q_b
    q_a_t, q_b_t = q_a.T.tocsr(), q_b.T.tocsr()
    return spla.LinearOperator(
        shape=(bundle.side, bundle.side),
        matvec=lambda v: q_b @ (middle @ (q_a @ v)),
        rmatvec=lambda v: q_a_t @ (middle.T @ (q_b_t @ v)),
        dtype=np.float64,
    )


def transition(bundle: KronBundle, mu: float, options: TheoryOptions):
    """F as a sparse matrix when it is cheap to form, as an operator otherwise."""
    if bundle.side <= options.direct_limit:
        return build_F(bundle, mu, small_step_approx=options.small_step_approx)
    return f_operator(bundle, mu, small_step_approx=options.small_step_approx)


def spectral_radius(matrix, *, dense_limit: int = 1_500) -> float:
    side = matrix.shape[0]
    if side <= dense_limit:
        dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix)
        return float(np.max(np.abs(scipy.linalg.eigvals(dense))))
    try:
        values = spla.eigs(
            matrix,
            k=1,
            which="LM",
            return_eigenvectors=False,
            ncv=min(side - 1, 40),
            maxiter=50 * side,
            tol=1e-10,
        )
        return float(np.max(np.abs(values)))
    except spla.ArpackNoConvergence as e:
        if sparse.issparse(matrix) and side <= 4 * dense_limit:
            logger.warning("ARPACK did not converge on a side-%d matrix, using a dense solver", side)
            return float(np.max(np.abs(scipy.linalg.eigvals(matrix.toarray()))))
        raise NumericError(f"spectral radius of a side-{side} matrix did not converge") from e


def msd_recursion_trace(
    bundle: KronBundle,
    mu: float,
    sigma_weight: np.ndarray,
    iters: int,
    *,
    options: TheoryOptions | None = None,
) -> np.ndarray:
    """
    sigma^T psi_n for n = 0..iters, starting from the deviation of
    zero-initialized models.
    """
    if options is None:
        options = TheoryOptions()
    if iters < 0:
        raise ValueError(f"iters must be non-negative, got {iters}")
    sigma_weight = np.asarray(sigma_weight, dtype=np.float64)
    f = transition(bundle, mu, options)
    drive = mu * mu * bundle.phi + bundle.omega

    psi = bundle.psi_initial.copy()
    trace = np.empty(iters + 1)
    trace[0] = sigma_weight @ psi
    for n in range(1, iters + 1):
        psi = f @ psi + drive
        value = float(sigma_weight @ psi)
        if not np.isfinite(value) or abs(value) > options.divergence_limit:
            raise DivergenceError(n, value, options.divergence_limit)
        trace[n] = value
    return trace


__all__ = [
    "build_F",
    "f_operator",
    "middle_matrix",
    "msd_recursion_trace",
    "spectral_radius",
    "transition",
]
