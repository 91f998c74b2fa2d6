# byzfed/core/execution.py
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from overrides import EnforceOverrides

from .context import ExperimentContext
from .error import ExperimentErrors

if TYPE_CHECKING:
    from ..sim.plan import ExperimentPlan
    from ..sim.replica import ReplicaTraces


class ReplicaExecutor(ABC, EnforceOverrides):
    """
    Handles the scheduling and execution of the replicas of an experiment.
    Uses the context's hooks around every replica.

    Returns the errors of failed replicas and the traces of the others,
    ordered by replica index whatever the completion order.
    """

    @abstractmethod
    async def execute(
        self,
        *,
        context: ExperimentContext,
        plan: "ExperimentPlan",
    ) -> "tuple[ExperimentErrors, list[ReplicaTraces]]":
        pass


__all__ = [
    "ReplicaExecutor",
]
