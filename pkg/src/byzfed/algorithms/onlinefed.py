# byzfed/algorithms/onlinefed.py
from typing import ClassVar, Literal

import numpy as np
from overrides import override
from pydantic import ConfigDict, Field

from ..core.data import SampleBatch
from ..core.spec import NetworkSpec
from ..core.state import FedState
from ..scheduling import RoundSchedule
from .base import AlgorithmTypeInfo, FedAlgorithm, RoundOutcome
from .psofed import psofed_round


def full_sharing(spec: NetworkSpec) -> NetworkSpec:
    """The same network with every entry exchanged (M = D)."""
    if spec.shared_entries == spec.dim:
        return spec
    return spec.model_update(shared_entries=spec.dim)


def onlinefed_round(
    *,
    state: FedState,
    schedule: RoundSchedule,
    batch: SampleBatch,
    spec: NetworkSpec,
    attack_rng: np.random.Generator,
    train_unselected: bool = True,
) -> RoundOutcome:
    """
    PSO-Fed with full masks. The schedule's masks are overridden, the random
    streams are consumed exactly as PSO-Fed would consume them.
    """
    full = np.ones_like(schedule.masks_current, dtype=np.bool_)
    if not (schedule.masks_current.all() and schedule.masks_next.all()):
        schedule = schedule.model_update(masks_current=full, masks_next=full)
    return psofed_round(
        state=state,
        schedule=schedule,
        batch=batch,
        spec=full_sharing(spec),
        attack_rng=attack_rng,
        train_unselected=train_unselected,
    )


class OnlineFedAlgorithm(FedAlgorithm):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    TYPE_INFO: ClassVar[AlgorithmTypeInfo] = AlgorithmTypeInfo(
        name="onlinefed",
        display_name="Online-Fed",
        description="Online federated LMS exchanging the full model.",
        has_theory=True,
    )

    type: Literal["onlinefed"] = "onlinefed"  # pyright: ignore[reportIncompatibleVariableOverride]
    train_unselected: bool = Field(default=True)

    @override
    def configure(self, spec: NetworkSpec) -> NetworkSpec:
        return full_sharing(spec)

    @override
    def run_round(
        self,
        *,
        state: FedState,
        schedule: RoundSchedule,
        batch: SampleBatch,
        spec: NetworkSpec,
        attack_rng: np.random.Generator,
    ) -> RoundOutcome:
        return onlinefed_round(
            state=state,
            schedule=schedule,
            batch=batch,
            spec=spec,
            attack_rng=attack_rng,
            train_unselected=self.train_unselected,
        )


__all__ = [
    "OnlineFedAlgorithm",
    "full_sharing",
    "onlinefed_round",
]
