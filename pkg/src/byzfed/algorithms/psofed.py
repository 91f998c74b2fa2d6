# byzfed/algorithms/psofed.py
"""
Partial-sharing online federated learning.

Every round the server sends the entries S_{k,n} w_n to the selected
clients, each client blends them into its local model, takes one LMS step
on a fresh sample, and the selected clients upload the entries of their new
model picked by S_{k,n+1}. Uploads of Byzantine clients may be poisoned on
the way.
"""

import logging
from collections.abc import Mapping, Sequence
from typing import ClassVar, Literal

import numpy as np
from overrides import override
from pydantic import ConfigDict, Field

from ..adversary.poisoning import corrupt_uploads
from ..core.data import DataSample, SampleBatch
from ..core.error import ArgumentError, NumericError, ProtocolError
from ..core.spec import NetworkSpec
from ..core.state import FedState
from ..scheduling import RoundSchedule, SelectionMask
from .base import AlgorithmTypeInfo, ClientUpdate, FedAlgorithm, RoundOutcome

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
# VECTORIZED KERNELS
# Rows are clients; masks are (K, D) boolean arrays.


def blend_models(global_model: np.ndarray, local_models: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """S w_n + (I - S) w_{k,n}, row by row."""
    return np.where(masks, global_model[None, :], local_models)


def lms_steps(
    models: np.ndarray,
    inputs: np.ndarray,
    responses: np.ndarray,
    stepsize: float,
) -> tuple[np.ndarray, np.ndarray]:
    """
    One LMS step per row. Returns the new models and the a-priori errors
    y - m^T x.
    """
    errors = responses - np.einsum("kd,kd->k", models, inputs)
    return models + stepsize * errors[:, None] * inputs, errors


def aggregate_uploads(global_model: np.ndarray, uploads: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """
    (1/|S_n|) sum_k [S_{k,n+1} w'_k + (I - S_{k,n+1}) w_n] over the rows of
    `uploads`.
    """
    if uploads.shape[0] == 0:
        raise ProtocolError("cannot aggregate an empty round")
    return np.mean(np.where(masks, uploads, global_model[None, :]), axis=0)


# ------------------------------------------------------------------------------
# PER-CLIENT OPERATIONS


def _check_stepsize(stepsize: float):
    if not stepsize > 0:
        raise ArgumentError(f"stepsize must be positive, got {stepsize}")


def psofed_client_step(
    state: FedState,
    client: int,
    sample: DataSample,
    mask_in: SelectionMask,
    global_slice: Sequence[float] | np.ndarray | None,
    stepsize: float,
) -> tuple[np.ndarray, float]:
    """
    Blends the received global entries into the client's model and takes
    one LMS step.

    global_slice holds the global model on the indices of mask_in, in
    order. None means the client was not selected this round, so nothing is
    blended in.
    """
    _check_stepsize(stepsize)
    if not 0 <= client < state.num_clients:
        raise ArgumentError(f"client {client} out of range 0..{state.num_clients - 1}")
    if sample.input.shape[0] != state.dim or mask_in.dim != state.dim:
        raise ArgumentError(
            f"dimension mismatch: model {state.dim}, sample {sample.input.shape[0]}, mask {mask_in.dim}"
        )
    if not (np.isfinite(sample.input).all() and np.isfinite(sample.response)):
        raise NumericError(f"non-finite sample for client {client}")

    blended = state.local_models[client].copy()
    if global_slice is not None:
        global_slice = np.asarray(global_slice, dtype=np.float64)
        if global_slice.shape != (mask_in.size,):
            raise ArgumentError(
                f"global slice has shape {global_slice.shape}, expected ({mask_in.size},)"
            )
        blended[list(mask_in.indices)] = global_slice
    error = sample.response - float(blended @ sample.input)
    return blended + stepsize * error * sample.input, error


def psofed_server_aggregate(
    state: FedState,
    updates: Sequence[ClientUpdate],
    masks_next: Mapping[int, SelectionMask],
    round_size: int,
) -> np.ndarray:
    """
    Averages the selected clients' contributions: each one is its uploaded
    entries where its next mask is set and the old global entries elsewhere.
    """
    if len(updates) != round_size:
        raise ProtocolError(f"expected {round_size} updates, received {len(updates)}")
    senders = [u.client_id for u in updates]
    if len(set(senders)) != len(senders):
        raise ProtocolError(f"duplicate updates from clients {sorted(senders)}")

    contributions = np.tile(state.global_model, (len(updates), 1))
    for row, update in enumerate(updates):
        expected = masks_next.get(update.client_id)
        if expected is None:
            raise ProtocolError(f"client {update.client_id} has no mask for this round")
        if expected.indices != update.mask.indices:
            raise ProtocolError(
                f"client {update.client_id} shared entries {update.mask.indices}, scheduled {expected.indices}"
            )
        contributions[row, list(update.mask.indices)] = update.values
    return contributions.mean(axis=0)


# ------------------------------------------------------------------------------
# ROUNDS


def psofed_round(
    *,
    state: FedState,
    schedule: RoundSchedule,
    batch: SampleBatch,
    spec: NetworkSpec,
    attack_rng: np.random.Generator,
    train_unselected: bool = True,
) -> RoundOutcome:
    """
    One synchronous round over the whole network, vectorized over clients.
    With train_unselected every client takes its LMS step; otherwise only
    the selected clients move.
    """
    active = schedule.participation
    blended = blend_models(
        state.global_model,
        state.local_models,
        schedule.masks_current & active[:, None],
    )
    trained, errors = lms_steps(blended, batch.inputs, batch.responses, spec.stepsize)
    if not train_unselected:
        trained = np.where(active[:, None], trained, state.local_models)

    selected = np.asarray(schedule.selected_clients, dtype=np.int64)
    uploads = corrupt_uploads(trained[selected], selected, spec.attack, attack_rng)
    global_model = aggregate_uploads(state.global_model, uploads, schedule.masks_next[selected])

    return RoundOutcome(
        state=FedState(
            global_model=global_model,
            local_models=trained,
            iteration=state.iteration + 1,
        ),
        errors=errors,
    )


class PsoFedAlgorithm(FedAlgorithm):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    TYPE_INFO: ClassVar[AlgorithmTypeInfo] = AlgorithmTypeInfo(
        name="psofed",
        display_name="PSO-Fed",
        description="Online federated LMS exchanging M of D model entries per message.",
        has_theory=True,
    )

    type: Literal["psofed"] = "psofed"  # pyright: ignore[reportIncompatibleVariableOverride]
    train_unselected: bool = Field(
        default=True,
        description="Whether clients outside S_n still take their local LMS step.",
    )

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
        return psofed_round(
            state=state,
            schedule=schedule,
            batch=batch,
            spec=spec,
            attack_rng=attack_rng,
            train_unselected=self.train_unselected,
        )


__all__ = [
    "PsoFedAlgorithm",
    "aggregate_uploads",
    "blend_models",
    "lms_steps",
    "psofed_client_step",
    "psofed_round",
    "psofed_server_aggregate",
]
