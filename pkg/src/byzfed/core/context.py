# byzfed/core/context.py
from abc import ABC
from typing import TYPE_CHECKING

from overrides import EnforceOverrides

from .error import ExperimentErrors

if TYPE_CHECKING:
    from ..sim.experiment import RunMetrics
    from ..sim.plan import ExperimentPlan
    from ..sim.replica import ReplicaTraces
    from ..sim.sweep import SweepRow


class ExperimentContext(ABC, EnforceOverrides):
    """
    Represents the environment in which an experiment runs: where replica
    traces are kept and what happens around each replica.
    A context may serve several experiments, for instance every point of a
    sweep.
    """

    async def on_experiment_start(
        self,
        *,
        plan: "ExperimentPlan",
    ) -> "RunMetrics | None":
        """
        A hook that is called before any replica of an experiment runs.

        If the context already knows the experiment's metrics, return them to
        skip the experiment.
        """
        return None

    async def on_experiment_finish(
        self,
        *,
        plan: "ExperimentPlan",
        metrics: "RunMetrics",
        errors: ExperimentErrors,
    ) -> "RunMetrics":
        """
        A hook that is called once the replica traces have been reduced.
        The context can modify the metrics by returning different ones.
        """
        return metrics

    async def on_replica_start(
        self,
        *,
        plan: "ExperimentPlan",
        replica_index: int,
    ) -> "ReplicaTraces | None":
        """
        A hook that is called when a replica starts.

        If the context already has the replica's traces, return them to skip
        the replica.
        """
        return None

    async def on_replica_error(
        self,
        *,
        plan: "ExperimentPlan",
        replica_index: int,
        exception: Exception,
    ) -> "Exception | ReplicaTraces":
        """
        A hook that is called when a replica raises an error.
        The context can modify the error by returning a different Exception,
        or silence it by returning traces.
        """
        return exception

    async def on_replica_finish(
        self,
        *,
        plan: "ExperimentPlan",
        replica_index: int,
        traces: "ReplicaTraces",
    ) -> "ReplicaTraces":
        return traces

    async def on_sweep_point(
        self,
        *,
        plan: "ExperimentPlan",
        row: "SweepRow",
    ) -> None:
        """
        A hook that is called once per finished sweep point.
        """
        return None


__all__ = [
    "ExperimentContext",
]
