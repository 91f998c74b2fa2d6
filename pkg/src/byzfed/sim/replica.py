# byzfed/sim/replica.py
import asyncio
import logging
from concurrent.futures import Executor
from functools import cached_property
from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from ..core.context import ExperimentContext
from ..core.data import generate_batch, generate_holdout
from ..core.error import DivergenceError, NumericError, ReplicaException
from ..core.metrics import network_mse, test_mse
from ..core.state import FedState
from ..scheduling import RoundScheduler
from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from ..utils.rng import holdout_stream, replica_streams
from .plan import ExperimentPlan

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12


class ReplicaTraces(ImmutableBaseModel):
    """
    The recorded output of one replica.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    replica_index: int
    test_mse: FloatArray = Field(description="Server test MSE after every round, shape (N,).")
    network_mse: FloatArray = Field(
        description="Mean over clients of the squared a-priori errors of every round, shape (N,)."
    )
    final_model: FloatArray = Field(description="w_N, shape (D,).")
    steady_test_mse: float
    steady_network_mse: float

    @model_validator(mode="after")
    def _check_traces(self):
        if self.test_mse.shape != self.network_mse.shape or self.test_mse.ndim != 1:
            raise NumericError(
                f"replica {self.replica_index} traces have shapes {self.test_mse.shape} and {self.network_mse.shape}"
            )
        if not (np.isfinite(self.test_mse).all() and np.isfinite(self.network_mse).all()):
            raise NumericError(f"replica {self.replica_index} has non-finite traces")
        return self

    @property
    def iterations(self) -> int:
        return self.test_mse.shape[0]


class TestSet:
    """The server's holdout set; identical for every replica of a seed."""

    __test__ = False

    def __init__(self, plan: ExperimentPlan):
        self.inputs, self.responses = generate_holdout(
            plan.network, holdout_stream(plan.seed), plan.test_size
        )

    @cached_property
    def size(self) -> int:
        return self.responses.shape[0]


def _guard(iteration: int, value: float):
    if not np.isfinite(value) or value > DIVERGENCE_LIMIT:
        raise DivergenceError(iteration, value, DIVERGENCE_LIMIT)


def run_replica(
    plan: ExperimentPlan,
    replica_index: int,
    test_set: TestSet | None = None,
) -> ReplicaTraces:
    """
    Runs the N rounds of one replica from the origin. Each round draws the
    schedule, one sample per client, lets the algorithm train, poison and
    aggregate, then records the metrics.

    The result depends only on (plan, replica_index).
    """
    if not 0 <= replica_index < plan.replicas:
        raise ValueError(f"replica index {replica_index} out of range 0..{plan.replicas - 1}")
    spec = plan.network
    algorithm = plan.algorithm
    if test_set is None:
        test_set = TestSet(plan)

    streams = replica_streams(plan.seed, replica_index)
    scheduler = RoundScheduler(spec, streams.data)
    state = FedState.zeros(spec.num_clients, spec.dim)

    test_trace = np.empty(plan.iterations)
    errors = np.empty((plan.iterations, spec.num_clients))
    for n in range(plan.iterations):
        schedule = scheduler.next_round()
        batch = generate_batch(spec, streams.data)
        try:
            outcome = algorithm.run_round(
                state=state,
                schedule=schedule,
                batch=batch,
                spec=spec,
                attack_rng=streams.attack,
            )
        except NumericError as e:
            raise DivergenceError(n, float("inf"), DIVERGENCE_LIMIT) from e
        state = outcome.state
        errors[n] = outcome.errors
        test_trace[n] = test_mse(state.global_model, test_set.inputs, test_set.responses)
        _guard(n, test_trace[n])
        _guard(n, float(np.max(np.abs(state.local_models))))

    network_trace = np.mean(errors**2, axis=1)
    return ReplicaTraces(
        replica_index=replica_index,
        test_mse=test_trace,
        network_mse=network_trace,
        final_model=state.global_model,
        steady_test_mse=float(np.mean(test_trace[-plan.window :])),
        steady_network_mse=network_mse(errors[-plan.window :].T, plan.window),
    )


async def execute_replica(
    *,
    context: ExperimentContext,
    plan: ExperimentPlan,
    replica_index: int,
    test_set: TestSet | None = None,
    executor: Executor | None = None,
) -> ReplicaTraces:
    """
    Runs one replica through the context's hooks. With an executor, the
    rounds run on one of its workers.
    """
    try:
        logger.info("Starting replica %d of experiment %s", replica_index, plan.digest)
        traces = await context.on_replica_start(plan=plan, replica_index=replica_index)
        if traces is not None:
            return traces
        if executor is None:
            traces = run_replica(plan, replica_index, test_set)
        else:
            loop = asyncio.get_running_loop()
            traces = await loop.run_in_executor(executor, run_replica, plan, replica_index, test_set)
        traces = await context.on_replica_finish(
            plan=plan,
            replica_index=replica_index,
            traces=traces,
        )
        logger.info("Finished replica %d of experiment %s", replica_index, plan.digest)
        return traces
    except Exception as e:
        logger.exception("Error in replica %d", replica_index)
        e = await context.on_replica_error(plan=plan, replica_index=replica_index, exception=e)
        if isinstance(e, ReplicaTraces):
            logger.warning("Error absorbed by context and replaced with replica traces")
            return e
        assert isinstance(e, Exception)
        raise ReplicaException(replica_index) from e


__all__ = [
    "DIVERGENCE_LIMIT",
    "ReplicaTraces",
    "TestSet",
    "execute_replica",
    "run_replica",
]
