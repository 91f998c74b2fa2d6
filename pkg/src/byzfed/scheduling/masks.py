# byzfed/scheduling/masks.py
from typing import Self

import numpy as np
from pydantic import model_validator

from ..core.error import ArgumentError
from ..core.spec import MaskMode
from ..utils.immutable import ImmutableBaseModel


class SelectionMask(ImmutableBaseModel):
    """
    The diagonal 0/1 selection matrix S_{k,n}, stored as its sorted support.
    """

    indices: tuple[int, ...]
    dim: int

    @model_validator(mode="after")
    def _check_indices(self):
        if len(set(self.indices)) != len(self.indices):
            raise ArgumentError(f"mask indices must be distinct, got {self.indices}")
        if any(not 0 <= i < self.dim for i in self.indices):
            raise ArgumentError(f"mask indices must lie in 0..{self.dim - 1}, got {self.indices}")
        if tuple(sorted(self.indices)) != self.indices:
            self._model_mutate(indices=tuple(sorted(self.indices)))
        return self

    @property
    def size(self) -> int:
        return len(self.indices)

    def to_array(self) -> np.ndarray:
        array = np.zeros(self.dim, dtype=np.bool_)
        array[list(self.indices)] = True
        return array

    @classmethod
    def from_array(cls, array: np.ndarray) -> Self:
        array = np.asarray(array, dtype=np.bool_)
        return cls(indices=tuple(int(i) for i in np.flatnonzero(array)), dim=array.shape[0])


class MaskCursor:
    """
    Round-robin position of one client: the next window starts at `offset`.
    """

    def __init__(self, offset: int = 0):
        self.offset = offset


def _check_sizes(dim: int, shared: int):
    if not 1 <= shared <= dim:
        raise ArgumentError(f"M ≤ D violated: cannot select {shared} of {dim} entries")


def draw_selection_mask(
    dim: int,
    shared: int,
    mode: MaskMode,
    state: MaskCursor | None,
    rng: np.random.Generator,
) -> SelectionMask:
    """
    uniform: M coordinates without replacement, independent across calls.
    round-robin: the cyclic window [offset, offset + M) mod D, after which
    the cursor advances by M.
    """
    _check_sizes(dim, shared)
    if mode == "uniform":
        chosen = rng.choice(dim, size=shared, replace=False)
        return SelectionMask(indices=tuple(sorted(int(i) for i in chosen)), dim=dim)
    if state is None:
        raise ArgumentError("round-robin masks need a cursor")
    window = (state.offset + np.arange(shared)) % dim
    state.offset = (state.offset + shared) % dim
    return SelectionMask(indices=tuple(sorted(int(i) for i in window)), dim=dim)


class MaskSchedule:
    """
    Draws the masks of all K clients at once, as a (K, D) boolean array.
    Owned by a single replica.
    """

    def __init__(self, num_clients: int, dim: int, shared: int, mode: MaskMode):
        _check_sizes(dim, shared)
        self.num_clients = num_clients
        self.dim = dim
        self.shared = shared
        self.mode = mode
        self.offsets = np.zeros(num_clients, dtype=np.int64)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        masks = np.zeros((self.num_clients, self.dim), dtype=np.bool_)
        if self.mode == "uniform":
            chosen = np.argsort(rng.random((self.num_clients, self.dim)), axis=1)[:, : self.shared]
        else:
            chosen = (self.offsets[:, None] + np.arange(self.shared)[None, :]) % self.dim
            self.offsets = (self.offsets + self.shared) % self.dim
        np.put_along_axis(masks, chosen, True, axis=1)
        return masks


__all__ = [
    "MaskCursor",
    "MaskSchedule",
    "SelectionMask",
    "draw_selection_mask",
]
