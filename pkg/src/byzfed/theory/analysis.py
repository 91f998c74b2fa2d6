# byzfed/theory/analysis.py
import logging
from collections.abc import Iterable
from typing import ClassVar

from pydantic import ConfigDict, Field
from scipy import sparse

from ..core.error import InstabilityError
from ..core.spec import NetworkSpec
from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from .moments import KronBundle, build_bundle
from .options import TheoryOptions
from .recursion import build_F
from .stability import mean_stability_bound, ms_stability_bound
from .steady_state import MseDecomposition, check_stability, steady_state_mse
from .stepsize import optimal_stepsize

logger = logging.getLogger(__name__)


class TheoryResult(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    stepsize: float
    f: sparse.csr_matrix | None = Field(
        default=None,
        description="F at the network's stepsize; omitted when too large to form.",
    )
    phi: FloatArray
    omega: FloatArray
    theta_nu: FloatArray
    mu_max_mean: float
    mu_max_ms: float
    spectral_radius: float | None = None
    mse: MseDecomposition | None = Field(
        default=None,
        description="None when the network is too large for the full prediction.",
    )
    mu_star: float


def analyze(
    spec: NetworkSpec,
    options: TheoryOptions | None = None,
    *,
    bundle: KronBundle | None = None,
    include_mse: bool | None = None,
) -> TheoryResult:
    """
    Bounds, mu* and (for networks up to options.max_clients clients) the
    steady-state MSE decomposition at spec.stepsize.

    Raises InstabilityError when the MSE is requested at an unstable
    stepsize.
    """
    if options is None:
        options = TheoryOptions()
    if bundle is None:
        bundle = build_bundle(spec)
    if include_mse is None:
        include_mse = spec.num_clients <= options.max_clients

    mu = spec.stepsize
    mu_max_ms = ms_stability_bound(bundle, options=options)
    mu_star = optimal_stepsize(bundle, options.neumann_j)

    f = None
    rho = None
    mse = None
    if include_mse:
        if bundle.side <= options.direct_limit:
            f = build_F(bundle, mu, small_step_approx=options.small_step_approx)
        rho = check_stability(bundle, mu, options)
        mse = steady_state_mse(bundle, mu, options, checked_radius=rho)
    else:
        logger.warning(
            "Skipping the steady-state MSE prediction for K=%d (max_clients=%d)",
            spec.num_clients,
            options.max_clients,
        )

    return TheoryResult(
        stepsize=mu,
        f=f,
        phi=bundle.phi,
        omega=bundle.omega,
        theta_nu=bundle.theta_nu,
        mu_max_mean=mean_stability_bound(spec),
        mu_max_ms=mu_max_ms,
        spectral_radius=rho,
        mse=mse,
        mu_star=mu_star,
    )


def theory_mse_curve(
    spec: NetworkSpec,
    mus: Iterable[float],
    options: TheoryOptions | None = None,
    *,
    bundle: KronBundle | None = None,
) -> list[MseDecomposition | None]:
    """
    The steady-state MSE decomposition over a stepsize grid; None where the
    recursion is unstable.
    """
    if options is None:
        options = TheoryOptions()
    if bundle is None:
        bundle = build_bundle(spec)
    curve: list[MseDecomposition | None] = []
    for mu in mus:
        try:
            curve.append(steady_state_mse(bundle, float(mu), options))
        except InstabilityError as e:
            logger.warning("No steady state at mu=%.6g: %s", mu, e.message)
            curve.append(None)
    return curve


__all__ = [
    "TheoryResult",
    "analyze",
    "theory_mse_curve",
]
