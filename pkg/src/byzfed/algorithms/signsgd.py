# byzfed/algorithms/signsgd.py
"""
Majority-vote SignSGD baseline.

Each selected client computes the LMS gradient -x eps at the current global
model and sends its coordinate-wise sign; the server moves the global model
by -mu * sign(sum of signs). sign(0) is 0, so ties leave a coordinate alone.
Poisoned clients corrupt the model they would have sent, which flips the
signs they vote with.
"""

from collections.abc import Iterable
from typing import ClassVar, Literal

import numpy as np
from overrides import override
from pydantic import ConfigDict, Field, model_validator

from ..adversary.poisoning import corrupt_uploads
from ..core.data import SampleBatch
from ..core.error import ArgumentError, ConfigurationError
from ..core.spec import AttackSpec, NetworkSpec
from ..core.state import FedState
from ..scheduling import RoundSchedule
from .base import AlgorithmTypeInfo, FedAlgorithm, RoundOutcome


def client_votes(
    global_model: np.ndarray,
    inputs: np.ndarray,
    responses: np.ndarray,
    stepsize: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns (local models after one LMS step from w_n, gradient signs,
    a-priori errors) for every row.
    """
    errors = responses - inputs @ global_model
    steps = errors[:, None] * inputs
    return global_model[None, :] + stepsize * steps, np.sign(-steps), errors


def signsgd_round(
    state: FedState,
    batch: SampleBatch,
    selected: Iterable[int],
    stepsize: float,
    *,
    attack: AttackSpec | None = None,
    attack_rng: np.random.Generator | None = None,
) -> np.ndarray:
    """
    The new global model after one majority-vote round.
    """
    if not stepsize > 0:
        raise ArgumentError(f"stepsize must be positive, got {stepsize}")
    chosen = np.asarray(sorted(selected), dtype=np.int64)
    if chosen.size == 0:
        raise ArgumentError("SignSGD round needs at least one selected client")
    global_model = state.global_model
    trained, signs, _ = client_votes(
        global_model, batch.inputs[chosen], batch.responses[chosen], stepsize
    )
    if attack is not None and attack.is_active:
        if attack_rng is None:
            raise ArgumentError("an active attack needs an attack stream")
        corrupted = corrupt_uploads(trained, chosen, attack, attack_rng)
        signs = np.sign(global_model[None, :] - corrupted)
    return global_model - stepsize * np.sign(signs.sum(axis=0))


class SignSgdAlgorithm(FedAlgorithm):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    TYPE_INFO: ClassVar[AlgorithmTypeInfo] = AlgorithmTypeInfo(
        name="signsgd",
        display_name="SignSGD",
        description="Sign-compressed gradients aggregated by majority vote.",
    )

    type: Literal["signsgd"] = "signsgd"  # pyright: ignore[reportIncompatibleVariableOverride]
    stepsize: float | None = Field(
        default=None,
        description="Overrides the network stepsize for this baseline.",
    )

    @model_validator(mode="after")
    def _check_stepsize(self):
        if self.stepsize is not None and not self.stepsize > 0:
            raise ConfigurationError(f"algorithm.stepsize > 0 violated: stepsize={self.stepsize}")
        return self

    @override
    def configure(self, spec: NetworkSpec) -> NetworkSpec:
        if self.stepsize is None or self.stepsize == spec.stepsize:
            return spec
        return spec.model_update(stepsize=self.stepsize)

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
        # every client still reports its a-priori error at the global model
        trained, _, errors = client_votes(
            state.global_model, batch.inputs, batch.responses, spec.stepsize
        )
        global_model = signsgd_round(
            state,
            batch,
            schedule.selected_clients,
            spec.stepsize,
            attack=spec.attack,
            attack_rng=attack_rng,
        )
        return RoundOutcome(
            state=FedState(
                global_model=global_model,
                local_models=trained,
                iteration=state.iteration + 1,
            ),
            errors=errors,
        )


__all__ = [
    "SignSgdAlgorithm",
    "client_votes",
    "signsgd_round",
]
