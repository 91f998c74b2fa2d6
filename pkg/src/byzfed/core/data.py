# byzfed/core/data.py
"""
Synthetic data for the linear observation model y = w*^T x + nu.
"""

from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, model_validator

from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from .error import ArgumentError, ConfigurationError
from .spec import ClientSpec, NetworkSpec

HOLDOUT_SIZE = 50


class DataSample(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    input: FloatArray
    response: float

    @model_validator(mode="after")
    def _check_input(self):
        if self.input.ndim != 1:
            raise ConfigurationError(f"sample input must be a vector, got shape {self.input.shape}")
        return self


class SampleBatch(ImmutableBaseModel):
    """
    One fresh sample per client: inputs has shape (K, D), responses (K,).
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    inputs: FloatArray
    responses: FloatArray

    def sample(self, client: int) -> DataSample:
        return DataSample(input=self.inputs[client], response=float(self.responses[client]))


def generate_sample(
    client: ClientSpec,
    true_model: np.ndarray,
    rng: np.random.Generator,
    *,
    dim: int | None = None,
) -> DataSample:
    true_model = np.asarray(true_model, dtype=np.float64)
    if true_model.ndim != 1 or true_model.size == 0:
        raise ConfigurationError(f"true model must be a non-empty vector, got shape {true_model.shape}")
    if dim is not None and true_model.shape[0] != dim:
        raise ConfigurationError(
            f"true model has {true_model.shape[0]} entries but the network dimension is {dim}"
        )
    x = rng.standard_normal(true_model.shape[0]) * np.sqrt(client.input_variance)
    noise = rng.standard_normal() * np.sqrt(client.noise_variance)
    return DataSample(input=x, response=float(x @ true_model + noise))


def generate_batch(spec: NetworkSpec, rng: np.random.Generator) -> SampleBatch:
    """
    Draws one sample for every client; the draw order is fixed (all inputs,
    then all noise) so a replica stream is consumed identically each round.
    """
    inputs = rng.standard_normal((spec.num_clients, spec.dim)) * np.sqrt(spec.input_variances)[:, None]
    noise = rng.standard_normal(spec.num_clients) * np.sqrt(spec.noise_variances)
    return SampleBatch(inputs=inputs, responses=inputs @ spec.optimal_model + noise)


def generate_holdout(
    spec: NetworkSpec,
    rng: np.random.Generator,
    size: int = HOLDOUT_SIZE,
) -> tuple[np.ndarray, np.ndarray]:
    """
    The server's test set. Each instance comes from a client drawn uniformly
    at random, so the set follows the network's mixture of input laws.
    """
    if size < 1:
        raise ArgumentError(f"test set size must be at least 1, got {size}")
    owners = rng.integers(spec.num_clients, size=size)
    inputs = rng.standard_normal((size, spec.dim)) * np.sqrt(spec.input_variances[owners])[:, None]
    noise = rng.standard_normal(size) * np.sqrt(spec.noise_variances[owners])
    return inputs, inputs @ spec.optimal_model + noise


__all__ = [
    "DataSample",
    "HOLDOUT_SIZE",
    "SampleBatch",
    "generate_batch",
    "generate_holdout",
    "generate_sample",
]
