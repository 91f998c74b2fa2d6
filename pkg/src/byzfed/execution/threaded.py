# byzfed/execution/threaded.py
import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor

from overrides import override

from ..core.context import ExperimentContext
from ..core.error import ExperimentErrors, ReplicaException
from ..core.execution import ReplicaExecutor
from ..sim.plan import ExperimentPlan
from ..sim.replica import ReplicaTraces, TestSet, execute_replica
from ..utils.env import get_env_int

logger = logging.getLogger(__name__)


def worker_count(requested: int | None = None) -> int:
    """
    The thread cap: `requested`, else BYZFED_THREADS, else the CPU count.
    """
    if requested is not None:
        if requested < 1:
            raise ValueError(f"worker count must be positive, got {requested}")
        return requested
    return get_env_int("BYZFED_THREADS", os.cpu_count() or 1)


class ThreadedReplicaExecutor(ReplicaExecutor):
    """
    Executes the replicas on a thread pool. numpy releases the GIL inside
    its kernels, so replicas overlap. Results come back in index order.
    """

    def __init__(self, max_workers: int | None = None):
        self.max_workers = worker_count(max_workers)

    @override
    async def execute(
        self,
        *,
        context: ExperimentContext,
        plan: ExperimentPlan,
    ) -> tuple[ExperimentErrors, list[ReplicaTraces]]:
        errors = ExperimentErrors()
        test_set = TestSet(plan)
        workers = min(self.max_workers, plan.replicas)
        logger.info("Running %d replicas on %d threads", plan.replicas, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = await asyncio.gather(
                *(
                    execute_replica(
                        context=context,
                        plan=plan,
                        replica_index=index,
                        test_set=test_set,
                        executor=pool,
                    )
                    for index in range(plan.replicas)
                ),
                return_exceptions=True,
            )
        results: list[ReplicaTraces] = []
        for outcome in outcomes:
            if isinstance(outcome, BaseException):
                if not (isinstance(outcome, ReplicaException) and outcome.diverged):
                    raise outcome
                errors.add(outcome)
            else:
                results.append(outcome)
        results.sort(key=lambda traces: traces.replica_index)
        return errors, results


__all__ = [
    "ThreadedReplicaExecutor",
    "worker_count",
]
