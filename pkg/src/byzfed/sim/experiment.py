# byzfed/sim/experiment.py
import logging
from collections.abc import Sequence
from typing import ClassVar, NamedTuple

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from ..core.context import ExperimentContext
from ..core.error import ExperimentError, ExperimentErrors, NumericError
from ..core.execution import ReplicaExecutor
from ..theory.steady_state import MseDecomposition
from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from ..utils.reduce import pairwise_reduce
from .plan import ExperimentPlan
from .replica import ReplicaTraces

logger = logging.getLogger(__name__)


class RunMetrics(ImmutableBaseModel):
    """
    Replica-averaged traces and steady-state estimates of one experiment.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    test_mse_trace: FloatArray = Field(description="Shape (N,), averaged over replicas.")
    network_mse_trace: FloatArray = Field(description="Shape (N,), averaged over replicas.")
    test_mse: float = Field(description="Steady-state test MSE over the trailing window.")
    network_mse: float = Field(description="Steady-state network MSE over the trailing window.")
    test_mse_se: float = Field(description="Standard error across replicas of test_mse.")
    network_mse_se: float = Field(description="Standard error across replicas of network_mse.")
    mean_final_model: FloatArray
    replicas_used: int
    flagged_replicas: tuple[int, ...] = ()
    per_term: MseDecomposition | None = Field(
        default=None,
        description="The theory decomposition this run is compared against, if any.",
    )

    @model_validator(mode="after")
    def _check_metrics(self):
        if not (np.isfinite(self.test_mse_trace).all() and np.isfinite(self.network_mse_trace).all()):
            raise NumericError("averaged traces are not finite")
        if self.test_mse_trace.shape != self.network_mse_trace.shape:
            raise NumericError(
                f"trace shapes differ: {self.test_mse_trace.shape} and {self.network_mse_trace.shape}"
            )
        return self

    @property
    def iterations(self) -> int:
        return self.test_mse_trace.shape[0]


class _Moments(NamedTuple):
    """Running sums that pairwise_reduce combines."""

    test_trace: np.ndarray
    network_trace: np.ndarray
    final_model: np.ndarray
    steady: np.ndarray
    steady_sq: np.ndarray

    @classmethod
    def of(cls, traces: ReplicaTraces) -> "_Moments":
        steady = np.array([traces.steady_test_mse, traces.steady_network_mse])
        return cls(
            test_trace=traces.test_mse,
            network_trace=traces.network_mse,
            final_model=traces.final_model,
            steady=steady,
            steady_sq=steady * steady,
        )


def _combine(a: _Moments, b: _Moments) -> _Moments:
    return _Moments(*(x + y for x, y in zip(a, b)))


def _standard_errors(moments: _Moments, count: int) -> np.ndarray:
    if count < 2:
        return np.zeros(2)
    mean = moments.steady / count
    variance = np.maximum(moments.steady_sq / count - mean * mean, 0.0) * count / (count - 1)
    return np.sqrt(variance / count)


def summarize(
    traces: Sequence[ReplicaTraces],
    *,
    flagged: Sequence[int] = (),
) -> RunMetrics:
    """
    Averages replica traces with a fixed reduction tree over the replica
    index order, so the result does not depend on execution order.
    """
    if len(traces) == 0:
        raise ExperimentError("no replica finished")
    ordered = sorted(traces, key=lambda t: t.replica_index)
    lengths = {t.iterations for t in ordered}
    if len(lengths) != 1:
        raise ExperimentError(f"replicas recorded different horizons: {sorted(lengths)}")
    count = len(ordered)
    total = pairwise_reduce([_Moments.of(t) for t in ordered], _combine)
    mean = total.steady / count
    se = _standard_errors(total, count)
    return RunMetrics(
        test_mse_trace=total.test_trace / count,
        network_mse_trace=total.network_trace / count,
        test_mse=float(mean[0]),
        network_mse=float(mean[1]),
        test_mse_se=float(se[0]),
        network_mse_se=float(se[1]),
        mean_final_model=total.final_model / count,
        replicas_used=count,
        flagged_replicas=tuple(sorted(flagged)),
    )


async def run_experiment(
    plan: ExperimentPlan,
    *,
    context: ExperimentContext | None = None,
    executor: ReplicaExecutor | None = None,
) -> RunMetrics:
    """
    Runs every replica of the plan and averages them. Diverged replicas are
    excluded and reported; if none survives, raises ExperimentError. Other
    replica failures propagate as ReplicaException.
    """
    if context is None:
        from ..contexts.in_memory import InMemoryContext

        context = InMemoryContext()
    if executor is None:
        from ..execution.serial import SerialReplicaExecutor

        executor = SerialReplicaExecutor()

    metrics = await context.on_experiment_start(plan=plan)
    if metrics is not None:
        return metrics

    errors, traces = await executor.execute(context=context, plan=plan)
    flagged = errors.failed_replicas
    if flagged:
        logger.warning(
            "Excluded %d of %d replicas of experiment %s: %s",
            len(flagged),
            plan.replicas,
            plan.digest,
            flagged,
        )
    if len(traces) == 0:
        raise ExperimentError(
            f"all {plan.replicas} replicas failed; first error: {_first_message(errors)}"
        )
    metrics = summarize(traces, flagged=flagged)
    return await context.on_experiment_finish(plan=plan, metrics=metrics, errors=errors)


def _first_message(errors: ExperimentErrors) -> str:
    for index in errors.failed_replicas:
        for message in errors.replica_errors[index]:
            if message is not None:
                return message
    return "unknown error"


__all__ = [
    "RunMetrics",
    "run_experiment",
    "summarize",
]
