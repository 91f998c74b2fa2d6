# byzfed/contexts/in_memory.py
from overrides import override

from ..core.context import ExperimentContext
from ..core.error import ExperimentErrors
from ..sim.experiment import RunMetrics
from ..sim.plan import ExperimentPlan
from ..sim.replica import ReplicaTraces
from ..sim.sweep import SweepRow


class InMemoryContext(ExperimentContext):
    """
    Keeps what an experiment produces in memory; nothing is ever skipped.
    """

    def __init__(self):
        self.traces: dict[tuple[str, int], ReplicaTraces] = {}
        self.metrics: dict[str, RunMetrics] = {}
        self.errors: dict[str, ExperimentErrors] = {}
        self.rows: list[SweepRow] = []

    @override
    async def on_replica_finish(
        self,
        *,
        plan: ExperimentPlan,
        replica_index: int,
        traces: ReplicaTraces,
    ) -> ReplicaTraces:
        self.traces[(plan.digest, replica_index)] = traces
        return traces

    @override
    async def on_experiment_finish(
        self,
        *,
        plan: ExperimentPlan,
        metrics: RunMetrics,
        errors: ExperimentErrors,
    ) -> RunMetrics:
        self.metrics[plan.digest] = metrics
        self.errors[plan.digest] = errors
        return metrics

    @override
    async def on_sweep_point(
        self,
        *,
        plan: ExperimentPlan,
        row: SweepRow,
    ) -> None:
        self.rows.append(row)


__all__ = [
    "InMemoryContext",
]
