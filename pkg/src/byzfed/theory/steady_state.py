# byzfed/theory/steady_state.py
import logging
import math

import numpy as np
from pydantic import model_validator
from scipy import sparse
from scipy.sparse import linalg as spla

from ..core.error import InstabilityError, NumericError
from ..utils.immutable import ImmutableBaseModel
from .moments import KronBundle
from .options import TheoryOptions
from .recursion import build_F, f_operator, spectral_radius, transition

logger = logging.getLogger(__name__)


class MseDecomposition(ImmutableBaseModel):
    """
    Steady-state network MSE split into the contributions of the
    observation noise through the learning dynamics (e_phi), of the attack
    (e_omega) and of the noise floor (e_theta).
    """

    e_phi: float
    e_omega: float
    e_theta: float
    total: float

    @model_validator(mode="after")
    def _check_terms(self):
        terms = (self.e_phi, self.e_omega, self.e_theta)
        if not all(math.isfinite(t) for t in terms) or min(terms) < 0:
            raise NumericError(f"MSE terms must be finite and non-negative, got {terms}")
        if not math.isclose(self.total, sum(terms), rel_tol=1e-12, abs_tol=1e-300):
            raise NumericError(f"MSE total {self.total} is not the sum of its terms {terms}")
        return self

    @classmethod
    def from_terms(cls, e_phi: float, e_omega: float, e_theta: float) -> "MseDecomposition":
        return cls(e_phi=e_phi, e_omega=e_omega, e_theta=e_theta, total=e_phi + e_omega + e_theta)


def check_stability(bundle: KronBundle, mu: float, options: TheoryOptions | None = None) -> float:
    """Returns rho(F), raising InstabilityError when it is not below one."""
    if options is None:
        options = TheoryOptions()
    rho = spectral_radius(transition(bundle, mu, options), dense_limit=options.dense_limit)
    if rho >= 1.0:
        raise InstabilityError(rho, mu)
    return rho


def steady_state_weights(bundle: KronBundle, mu: float, options: TheoryOptions | None = None) -> np.ndarray:
    """
    Solves (I - F^T) z = sigma for the network-MSE weighting sigma.
    """
    if options is None:
        options = TheoryOptions()
    sigma = bundle.sigma_weight
    use_direct = options.solver == "direct" or (
        options.solver == "auto" and bundle.side <= options.direct_limit
    )
    if use_direct:
        f = build_F(bundle, mu, small_step_approx=options.small_step_approx)
        system = (sparse.identity(bundle.side, format="csc") - f.T).tocsc()
        z = spla.spsolve(system, sigma)
        residual = float(np.linalg.norm(system @ z - sigma))
    else:
        f = f_operator(bundle, mu, small_step_approx=options.small_step_approx)
        system = spla.LinearOperator(
            shape=(bundle.side, bundle.side),
            matvec=lambda v: v - f.rmatvec(v),
            dtype=np.float64,
        )
        z, info = spla.gmres(
            system,
            sigma,
            rtol=options.solver_rtol,
            atol=0.0,
            restart=min(bundle.side, 200),
            maxiter=1_000,
        )
        if info != 0:
            raise NumericError(f"GMRES did not reach rtol {options.solver_rtol:g} (info={info})")
        residual = float(np.linalg.norm(system.matvec(z) - sigma))
    if not np.all(np.isfinite(z)):
        raise NumericError("steady-state solve produced non-finite values")
    logger.info(
        "Solved steady state (side %d, %s): residual %.3g",
        bundle.side,
        "direct" if use_direct else "gmres",
        residual,
    )
    return z


def steady_state_mse(
    bundle: KronBundle,
    mu: float,
    options: TheoryOptions | None = None,
    *,
    checked_radius: float | None = None,
) -> MseDecomposition:
    """
    The steady-state network MSE
        (1/K) [mu^2 phi^T z + omega^T z + tr(Θ_ν)],
    checking rho(F) < 1 first unless the caller already did.
    """
    if options is None:
        options = TheoryOptions()
    if checked_radius is None:
        check_stability(bundle, mu, options)
    elif checked_radius >= 1.0:
        raise InstabilityError(checked_radius, mu)

    K = bundle.num_clients
    e_theta = float(np.sum(bundle.theta_nu)) / K
    z = steady_state_weights(bundle, mu, options)
    e_phi = mu * mu * float(bundle.phi @ z) / K
    e_omega = float(bundle.omega @ z) / K if np.any(bundle.omega) else 0.0
    # round-off in the solve may leave a term a hair below zero
    return MseDecomposition.from_terms(max(e_phi, 0.0), max(e_omega, 0.0), e_theta)


__all__ = [
    "MseDecomposition",
    "check_stability",
    "steady_state_mse",
    "steady_state_weights",
]
