# byzfed/scheduling/clients.py
from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, model_validator

from ..core.error import ArgumentError
from ..core.spec import NetworkSpec
from ..utils.arrays import BoolArray
from ..utils.immutable import ImmutableBaseModel
from .masks import MaskSchedule, SelectionMask


def draw_client_set(num_clients: int, round_size: int, rng: np.random.Generator) -> frozenset[int]:
    """
    Uniform sample of round_size distinct clients.
    """
    if not 1 <= round_size <= num_clients:
        raise ArgumentError(
            f"1 ≤ round_size ≤ K violated: round_size={round_size}, K={num_clients}"
        )
    return frozenset(int(k) for k in rng.choice(num_clients, size=round_size, replace=False))


class RoundSchedule(ImmutableBaseModel):
    """
    Who participates in round n and which entries every client exchanges:
    masks_current is S_{k,n} (downlink blend), masks_next is S_{k,n+1}
    (uplink share, which is also the next round's downlink mask).
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    selected_clients: tuple[int, ...]
    masks_current: BoolArray
    masks_next: BoolArray

    @model_validator(mode="after")
    def _check_schedule(self):
        if len(set(self.selected_clients)) != len(self.selected_clients):
            raise ArgumentError(f"selected clients must be distinct, got {self.selected_clients}")
        if self.masks_current.shape != self.masks_next.shape or self.masks_current.ndim != 2:
            raise ArgumentError(
                f"mask arrays must both be (K, D), got {self.masks_current.shape} and {self.masks_next.shape}"
            )
        if any(not 0 <= k < self.masks_current.shape[0] for k in self.selected_clients):
            raise ArgumentError(f"selected clients out of range: {self.selected_clients}")
        if tuple(sorted(self.selected_clients)) != self.selected_clients:
            self._model_mutate(selected_clients=tuple(sorted(self.selected_clients)))
        return self

    @property
    def participation(self) -> np.ndarray:
        """a_{k,n} as a boolean vector."""
        active = np.zeros(self.masks_current.shape[0], dtype=np.bool_)
        active[list(self.selected_clients)] = True
        return active

    def mask_current(self, client: int) -> SelectionMask:
        return SelectionMask.from_array(self.masks_current[client])

    def mask_next(self, client: int) -> SelectionMask:
        return SelectionMask.from_array(self.masks_next[client])


class RoundScheduler:
    """
    Produces the sequence of RoundSchedules of one replica. Each round first
    draws the next masks, then the participating clients.
    """

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self.masks = MaskSchedule(spec.num_clients, spec.dim, spec.shared_entries, spec.mask_mode)
        self._current = self.masks.draw(rng)

    def next_round(self) -> RoundSchedule:
        masks_next = self.masks.draw(self.rng)
        selected = draw_client_set(self.spec.num_clients, self.spec.round_size, self.rng)
        schedule = RoundSchedule(
            selected_clients=tuple(sorted(selected)),
            masks_current=self._current,
            masks_next=masks_next,
        )
        self._current = masks_next
        return schedule


__all__ = [
    "RoundSchedule",
    "RoundScheduler",
    "draw_client_set",
]
