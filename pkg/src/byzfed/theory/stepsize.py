# byzfed/theory/stepsize.py
import logging

import numpy as np

from ..core.error import ArgumentError, DegenerateConfigError
from .moments import KronBundle

logger = logging.getLogger(__name__)


def neumann_coefficients(bundle: KronBundle, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Writes sum_{j=0}^{J} (F^T)^j sigma = s0 + mu s1 + mu^2 s2 + O(mu^3),
    where F^T = A0 - mu A1 + mu^2 A2 with A0 = Q_A^T Q_B^T,
    A1 = Q_A^T K Q_B^T and A2 = Q_A^T H Q_B^T. Only matrix-vector products
    are formed.
    """
    q_a_t = bundle.q_a.T.tocsr()
    q_b_t = bundle.q_b.T.tocsr()

    def a0(v):
        return q_a_t @ (q_b_t @ v)

    def a1(v):
        return q_a_t @ (bundle.k_mat @ (q_b_t @ v))

    def a2(v):
        return q_a_t @ (bundle.h @ (q_b_t @ v))

    c0 = bundle.sigma_weight.copy()
    c1 = np.zeros_like(c0)
    c2 = np.zeros_like(c0)
    s0, s1, s2 = c0.copy(), c1.copy(), c2.copy()
    for _ in range(order):
        c0, c1, c2 = a0(c0), a0(c1) - a1(c0), a0(c2) - a1(c1) + a2(c0)
        s0 += c0
        s1 += c1
        s2 += c2
    return s0, s1, s2


def optimal_stepsize(bundle: KronBundle, J: int = 5) -> float:
    """
    The stepsize minimizing the second-order expansion of the steady-state
    MSE in mu:
        mu* = -omega^T s1 / (2 (phi^T s0 + omega^T s2)),
    which is 0 without an attack.
    """
    if J < 3:
        raise ArgumentError(f"Neumann order J must be at least 3, got {J}")
    if not np.any(bundle.omega):
        return 0.0
    s0, s1, s2 = neumann_coefficients(bundle, J)
    numerator = -float(bundle.omega @ s1)
    denominator = 2.0 * (float(bundle.phi @ s0) + float(bundle.omega @ s2))
    if denominator == 0.0 or not np.isfinite(denominator):
        raise DegenerateConfigError(f"optimal stepsize has a zero denominator (J={J})")
    mu_star = numerator / denominator
    logger.debug("mu* = %.6g / %.6g = %.6g with J=%d", numerator, denominator, mu_star, J)
    return mu_star


__all__ = [
    "neumann_coefficients",
    "optimal_stepsize",
]
