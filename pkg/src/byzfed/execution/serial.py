# byzfed/execution/serial.py
from overrides import override

from ..core.context import ExperimentContext
from ..core.error import ExperimentErrors, ReplicaException
from ..core.execution import ReplicaExecutor
from ..sim.plan import ExperimentPlan
from ..sim.replica import ReplicaTraces, TestSet, execute_replica


class SerialReplicaExecutor(ReplicaExecutor):
    """
    Executes the replicas one at a time on the current thread, in index
    order. Diverged replicas are recorded; any other failure stops the
    experiment.
    """

    @override
    async def execute(
        self,
        *,
        context: ExperimentContext,
        plan: ExperimentPlan,
    ) -> tuple[ExperimentErrors, list[ReplicaTraces]]:
        errors = ExperimentErrors()
        results: list[ReplicaTraces] = []
        test_set = TestSet(plan)
        for index in range(plan.replicas):
            try:
                traces = await execute_replica(
                    context=context,
                    plan=plan,
                    replica_index=index,
                    test_set=test_set,
                )
            except ReplicaException as e:
                if not e.diverged:
                    raise
                errors.add(e)
                continue
            results.append(traces)
        return errors, results


__all__ = [
    "SerialReplicaExecutor",
]
