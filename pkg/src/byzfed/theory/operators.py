# byzfed/theory/operators.py
"""
The extended-form operators of one round.

The extended state stacks the global model on top of the K local models,
w_e = col{w, w_1, ..., w_K}, and one round reads

    w_e' = B (A w_e + mu X eps) + C delta

Every block of A, B and C is a D x D diagonal matrix that is affine in the
random selections P_k = a_k S_k. An OperatorTable lists, per block row, the
nonzero blocks as AffineEntry values; the same tables realize the operators
for a sampled schedule and give their block Kronecker moments in closed
form (see moments.py).
"""

from typing import Literal, NamedTuple

import numpy as np

from ..core.data import SampleBatch
from ..core.error import ArgumentError
from ..core.state import FedState
from ..scheduling import RoundSchedule

type EntryKind = Literal["none", "one", "all"]


class AffineEntry(NamedTuple):
    """
    Block (row, col) = alpha I + coef * P_client   (kind "one")
                     = alpha I + coef * sum_k P_k  (kind "all")
                     = alpha I                     (kind "none")
    """

    col: int
    alpha: float
    kind: EntryKind = "none"
    client: int = -1
    coef: float = 0.0

    def total(self, num_clients: int) -> float:
        """Sum over clients of the coefficient of P_k."""
        if self.kind == "one":
            return self.coef
        if self.kind == "all":
            return num_clients * self.coef
        return 0.0

    def cross(self, other: "AffineEntry", num_clients: int) -> float:
        """Sum over clients of coef_k * other.coef_k."""
        if self.kind == "none" or other.kind == "none":
            return 0.0
        if self.kind == "one" and other.kind == "one":
            return self.coef * other.coef if self.client == other.client else 0.0
        if self.kind == "all" and other.kind == "all":
            return num_clients * self.coef * other.coef
        return self.coef * other.coef


type OperatorTable = tuple[tuple[AffineEntry, ...], ...]


def combination_table(num_clients: int) -> OperatorTable:
    """A_n: the server row keeps w_n, client k blends P_k w_n + (I - P_k) w_k."""
    rows = [(AffineEntry(col=0, alpha=1.0),)]
    for k in range(num_clients):
        rows.append(
            (
                AffineEntry(col=0, alpha=0.0, kind="one", client=k, coef=1.0),
                AffineEntry(col=k + 1, alpha=1.0, kind="one", client=k, coef=-1.0),
            )
        )
    return tuple(rows)


def aggregation_table(num_clients: int, round_size: int) -> OperatorTable:
    """B_{n+1}: the server averages the shared entries, clients keep theirs."""
    server = [AffineEntry(col=0, alpha=1.0, kind="all", coef=-1.0 / round_size)]
    server += [
        AffineEntry(col=k + 1, alpha=0.0, kind="one", client=k, coef=1.0 / round_size)
        for k in range(num_clients)
    ]
    rows = [tuple(server)]
    rows += [(AffineEntry(col=k + 1, alpha=1.0),) for k in range(num_clients)]
    return tuple(rows)


def attack_table(num_clients: int, round_size: int) -> OperatorTable:
    """C_{n+1}: the perturbations reach the server through the shared entries."""
    server = tuple(
        AffineEntry(col=k + 1, alpha=0.0, kind="one", client=k, coef=1.0 / round_size)
        for k in range(num_clients)
    )
    return (server,) + tuple(() for _ in range(num_clients))


# ------------------------------------------------------------------------------
# REALIZATIONS


def realize_batch(table: OperatorTable, selections: np.ndarray) -> np.ndarray:
    """
    Dense ((K+1)D x (K+1)D) operators for a batch of draws of P_k, given as
    a (batch, K, D) array of their diagonals.
    """
    selections = np.asarray(selections, dtype=np.float64)
    batch, num_clients, dim = selections.shape
    if len(table) != num_clients + 1:
        raise ArgumentError(f"table has {len(table)} block rows, expected {num_clients + 1}")
    total = selections.sum(axis=1)
    n = num_clients + 1
    out = np.zeros((batch, n * dim, n * dim))
    diagonal = np.arange(dim)
    for i, row in enumerate(table):
        for entry in row:
            values = np.full((batch, dim), entry.alpha)
            if entry.kind == "one":
                values = values + entry.coef * selections[:, entry.client]
            elif entry.kind == "all":
                values = values + entry.coef * total
            out[:, i * dim + diagonal, entry.col * dim + diagonal] = values
    return out


def realize(table: OperatorTable, selections: np.ndarray) -> np.ndarray:
    """
    The operator for one draw of P_k, given as the (K, D) array of their
    diagonals.
    """
    return realize_batch(table, np.asarray(selections, dtype=np.float64)[None])[0]


def _selections(schedule: RoundSchedule, masks: np.ndarray) -> np.ndarray:
    return (masks & schedule.participation[:, None]).astype(np.float64)


def combination_operator(schedule: RoundSchedule) -> np.ndarray:
    selections = _selections(schedule, schedule.masks_current)
    return realize(combination_table(selections.shape[0]), selections)


def aggregation_operator(schedule: RoundSchedule) -> np.ndarray:
    selections = _selections(schedule, schedule.masks_next)
    table = aggregation_table(selections.shape[0], len(schedule.selected_clients))
    return realize(table, selections)


def attack_operator(schedule: RoundSchedule) -> np.ndarray:
    selections = _selections(schedule, schedule.masks_next)
    table = attack_table(selections.shape[0], len(schedule.selected_clients))
    return realize(table, selections)


def regressor_operator(inputs: np.ndarray) -> np.ndarray:
    """X_n = bdiag{0_D, x_1, ..., x_K}, of shape ((K+1)D, K+1)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    num_clients, dim = inputs.shape
    out = np.zeros(((num_clients + 1) * dim, num_clients + 1))
    for k in range(num_clients):
        out[(k + 1) * dim : (k + 2) * dim, k + 1] = inputs[k]
    return out


def extended_state(state: FedState) -> np.ndarray:
    return np.concatenate([state.global_model, state.local_models.reshape(-1)])


def extended_optimum(true_model: np.ndarray, num_clients: int) -> np.ndarray:
    """w*_e: the true model in every block."""
    return np.tile(np.asarray(true_model, dtype=np.float64), num_clients + 1)


def extended_step(
    state: FedState,
    schedule: RoundSchedule,
    batch: SampleBatch,
    stepsize: float,
    perturbations: np.ndarray | None = None,
) -> np.ndarray:
    """
    One round in extended form. perturbations, if given, holds
    beta_k tau_k delta_k as a (K, D) array.
    """
    num_clients, dim = state.local_models.shape
    w_e = extended_state(state)
    combined = combination_operator(schedule) @ w_e
    regressors = regressor_operator(batch.inputs)
    models = combined.reshape(num_clients + 1, dim)[1:]
    errors = np.concatenate([[0.0], batch.responses - np.einsum("kd,kd->k", models, batch.inputs)])
    out = aggregation_operator(schedule) @ (combined + stepsize * regressors @ errors)
    if perturbations is not None:
        perturbations = np.asarray(perturbations, dtype=np.float64)
        if perturbations.shape != (num_clients, dim):
            raise ArgumentError(
                f"perturbations must have shape ({num_clients}, {dim}), got {perturbations.shape}"
            )
        out = out + attack_operator(schedule) @ np.concatenate([np.zeros(dim), perturbations.ravel()])
    return out


__all__ = [
    "AffineEntry",
    "OperatorTable",
    "aggregation_operator",
    "aggregation_table",
    "attack_operator",
    "attack_table",
    "combination_operator",
    "combination_table",
    "extended_optimum",
    "extended_state",
    "extended_step",
    "realize",
    "realize_batch",
    "regressor_operator",
]
