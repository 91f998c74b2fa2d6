# byzfed/core/state.py
from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from .error import NumericError


class FedState(ImmutableBaseModel):
    """
    The models held by the server and by every client at one iteration.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    global_model: FloatArray = Field(description="w_n, shape (D,).")
    local_models: FloatArray = Field(description="w_{k,n}, shape (K, D).")
    iteration: int = 0

    @model_validator(mode="after")
    def _check_state(self):
        if self.global_model.ndim != 1:
            raise NumericError(f"global model must be a vector, got shape {self.global_model.shape}")
        if self.local_models.ndim != 2 or self.local_models.shape[1] != self.global_model.shape[0]:
            raise NumericError(
                f"local models must have shape (K, {self.global_model.shape[0]}), got {self.local_models.shape}"
            )
        if not (np.isfinite(self.global_model).all() and np.isfinite(self.local_models).all()):
            raise NumericError(f"non-finite model at iteration {self.iteration}")
        return self

    @classmethod
    def zeros(cls, num_clients: int, dim: int) -> "FedState":
        """All models start at the origin."""
        return cls(
            global_model=np.zeros(dim),
            local_models=np.zeros((num_clients, dim)),
            iteration=0,
        )

    @property
    def num_clients(self) -> int:
        return self.local_models.shape[0]

    @property
    def dim(self) -> int:
        return self.global_model.shape[0]


__all__ = [
    "FedState",
]
