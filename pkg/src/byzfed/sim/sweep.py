# byzfed/sim/sweep.py
import logging

from pydantic import Field

from ..core.context import ExperimentContext
from ..core.error import ConfigurationError, InstabilityError, UnsupportedLawError, UserException
from ..core.execution import ReplicaExecutor
from ..core.spec import NetworkSpec
from ..theory.analysis import TheoryResult, analyze
from ..theory.moments import KronBundle, build_bundle
from ..theory.options import TheoryOptions
from ..theory.steady_state import MseDecomposition
from ..utils.immutable import ImmutableBaseModel
from .experiment import RunMetrics, run_experiment
from .plan import ExperimentPlan

logger = logging.getLogger(__name__)


class SweepRow(ImmutableBaseModel):
    """
    One sweep point: the simulated steady state next to the theory
    prediction for the same network, when there is one.
    """

    sweep_param: str
    sweep_value: float
    algorithm: str
    sim_test_mse: float
    sim_network_mse: float
    sim_test_mse_se: float = 0.0
    sim_network_mse_se: float = 0.0
    theory: MseDecomposition | None = Field(
        default=None,
        description="Absent when the network is too large or the recursion is unstable.",
    )
    mu_max_mean: float | None = None
    mu_max_ms: float | None = None
    mu_star: float | None = None
    replicas: int
    seed: int


class BundleCache:
    """
    Moment bundles do not depend on the stepsize, so a stepsize sweep
    builds one.
    """

    def __init__(self):
        self._bundles: dict[str, KronBundle] = {}

    def get(self, spec: NetworkSpec) -> KronBundle:
        key = spec.model_dump_json(exclude={"stepsize"})
        if key not in self._bundles:
            self._bundles[key] = build_bundle(spec)
        return self._bundles[key]


def predict(
    spec: NetworkSpec,
    options: TheoryOptions,
    cache: BundleCache | None = None,
) -> TheoryResult | None:
    """
    The theory for one point, or None if the engine cannot describe it. An
    unstable stepsize still yields the bounds, without the MSE.
    """
    try:
        bundle = cache.get(spec) if cache is not None else build_bundle(spec)
        try:
            return analyze(spec, options, bundle=bundle)
        except InstabilityError as e:
            logger.warning("No steady-state prediction at stepsize %.6g: %s", spec.stepsize, e.message)
            return analyze(spec, options, bundle=bundle, include_mse=False)
    except UnsupportedLawError:
        logger.warning(
            'Theory skipped: mask_mode="%s" does not follow the uniform selection law',
            spec.mask_mode,
        )
        return None
    except UserException as e:
        logger.warning("Theory unavailable for this point: %s", e.message)
        return None


async def sweep(
    plan: ExperimentPlan,
    *,
    context: ExperimentContext | None = None,
    executor: ReplicaExecutor | None = None,
    options: TheoryOptions | None = None,
    include_theory: bool = True,
) -> list[SweepRow]:
    """
    One experiment per value of the plan's sweep axis. Every point shares
    the plan's seed, so points differ only in the swept parameter.
    """
    if plan.sweep is None:
        raise ConfigurationError("sweep needs a sweep axis (experiment.sweep)")
    if context is None:
        from ..contexts.in_memory import InMemoryContext

        context = InMemoryContext()
    if options is None:
        options = TheoryOptions()
    with_theory = include_theory and plan.algorithm.TYPE_INFO.has_theory
    cache = BundleCache()

    rows: list[SweepRow] = []
    parameter = plan.sweep.parameter
    for value, point in plan.points():
        metrics: RunMetrics = await run_experiment(point, context=context, executor=executor)
        theory = predict(point.network, options, cache) if with_theory else None
        if theory is not None and theory.mse is not None:
            metrics = metrics.model_update(per_term=theory.mse)
        row = SweepRow(
            sweep_param=parameter,
            sweep_value=value,
            algorithm=point.algorithm.name,
            sim_test_mse=metrics.test_mse,
            sim_network_mse=metrics.network_mse,
            sim_test_mse_se=metrics.test_mse_se,
            sim_network_mse_se=metrics.network_mse_se,
            theory=metrics.per_term,
            mu_max_mean=theory.mu_max_mean if theory is not None else None,
            mu_max_ms=theory.mu_max_ms if theory is not None else None,
            mu_star=theory.mu_star if theory is not None else None,
            replicas=metrics.replicas_used,
            seed=point.seed,
        )
        logger.info(
            "Sweep point %s=%.6g: test MSE %.6g, network MSE %.6g, theory %s",
            parameter,
            value,
            row.sim_test_mse,
            row.sim_network_mse,
            f"{row.theory.total:.6g}" if row.theory is not None else "absent",
        )
        await context.on_sweep_point(plan=point, row=row)
        rows.append(row)
    return rows


__all__ = [
    "BundleCache",
    "SweepRow",
    "predict",
    "sweep",
]
