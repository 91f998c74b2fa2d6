# byzfed/core/spec.py
import math
from collections.abc import Iterable
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import Field, model_validator

from ..utils.immutable import ImmutableBaseModel
from .error import ConfigurationError

type MaskMode = Literal["uniform", "round-robin"]


def _check_finite(name: str, value: float):
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value}")


class ClientSpec(ImmutableBaseModel):
    """
    Statistics of one client's data stream.
    """

    input_variance: float = Field(description="Variance of every input entry.")
    noise_variance: float = Field(description="Variance of the observation noise.")
    byzantine: bool = Field(default=False, description="Whether the client poisons its uploads.")

    @model_validator(mode="after")
    def _check_variances(self):
        _check_finite("input_variance", self.input_variance)
        _check_finite("noise_variance", self.noise_variance)
        if self.input_variance <= 0:
            raise ConfigurationError(
                f"input_variance > 0 violated: input_variance={self.input_variance}"
            )
        if self.noise_variance < 0:
            raise ConfigurationError(
                f"noise_variance >= 0 violated: noise_variance={self.noise_variance}"
            )
        return self


class AttackSpec(ImmutableBaseModel):
    """
    The intermittent model-poisoning attack: every round, each Byzantine
    client adds N(0, attack_variance I) to its upload with probability
    attack_probability.
    """

    attack_probability: float = 0.0
    attack_variance: float = 0.0
    byzantine_set: tuple[int, ...] = ()
    num_clients: int | None = None

    @model_validator(mode="after")
    def _check_attack(self):
        _check_finite("attack_probability", self.attack_probability)
        _check_finite("attack_variance", self.attack_variance)
        if not 0.0 <= self.attack_probability <= 1.0:
            raise ConfigurationError(
                f"0 <= attack_probability <= 1 violated: attack_probability={self.attack_probability}"
            )
        if self.attack_variance < 0:
            raise ConfigurationError(
                f"attack_variance >= 0 violated: attack_variance={self.attack_variance}"
            )
        if len(set(self.byzantine_set)) != len(self.byzantine_set):
            raise ConfigurationError(f"byzantine_set has duplicates: {self.byzantine_set}")
        if any(k < 0 for k in self.byzantine_set):
            raise ConfigurationError(f"byzantine_set has negative ids: {self.byzantine_set}")
        if self.num_clients is not None and any(
            k >= self.num_clients for k in self.byzantine_set
        ):
            raise ConfigurationError(
                f"byzantine_set must be a subset of 0..{self.num_clients - 1}, got {self.byzantine_set}"
            )
        if tuple(sorted(self.byzantine_set)) != self.byzantine_set:
            self._model_mutate(byzantine_set=tuple(sorted(self.byzantine_set)))
        return self

    @property
    def is_active(self) -> bool:
        """Whether the attack can change any upload at all."""
        return (
            len(self.byzantine_set) > 0
            and self.attack_probability > 0
            and self.attack_variance > 0
        )


class NetworkSpec(ImmutableBaseModel):
    """
    A complete description of one federated network: sizes, the learning
    stepsize, the attack, and every client's statistics. The simulator and
    the theory engine both consume this object.
    """

    num_clients: int = Field(description="K, number of clients.")
    dim: int = Field(description="D, model dimension.")
    shared_entries: int = Field(description="M, model entries exchanged per message.")
    round_size: int = Field(description="|S_n|, clients selected per iteration.")
    stepsize: float = Field(description="mu, the local LMS stepsize.")
    attack_probability: float = 0.0
    attack_variance: float = 0.0
    clients: tuple[ClientSpec, ...]
    true_model: tuple[float, ...] | None = Field(
        default=None,
        description="w*; defaults to (1/sqrt(D)) * ones(D).",
    )
    mask_mode: MaskMode = "uniform"

    @model_validator(mode="after")
    def _check_network(self):
        if self.num_clients < 1:
            raise ConfigurationError(f"K >= 1 violated: num_clients={self.num_clients}")
        if self.dim < 1:
            raise ConfigurationError(f"D >= 1 violated: dim={self.dim}")
        if self.shared_entries < 1:
            raise ConfigurationError(
                f"M >= 1 violated: shared_entries={self.shared_entries}"
            )
        if self.shared_entries > self.dim:
            raise ConfigurationError(
                f"M ≤ D violated: shared_entries={self.shared_entries} exceeds dim={self.dim}"
            )
        if not 1 <= self.round_size <= self.num_clients:
            raise ConfigurationError(
                f"1 ≤ round_size ≤ K violated: round_size={self.round_size}, num_clients={self.num_clients}"
            )
        _check_finite("stepsize", self.stepsize)
        if self.stepsize < 0:
            raise ConfigurationError(f"stepsize >= 0 violated: stepsize={self.stepsize}")
        if len(self.clients) != self.num_clients:
            raise ConfigurationError(
                f"clients must list K={self.num_clients} entries, got {len(self.clients)}"
            )
        if self.true_model is None:
            self._model_mutate(true_model=(1.0 / math.sqrt(self.dim),) * self.dim)
        elif len(self.true_model) != self.dim:
            raise ConfigurationError(
                f"true_model must have D={self.dim} entries, got {len(self.true_model)}"
            )
        # delegates the attack range checks
        AttackSpec(
            attack_probability=self.attack_probability,
            attack_variance=self.attack_variance,
        )
        return self

    @classmethod
    def homogeneous(
        cls,
        *,
        num_clients: int,
        dim: int,
        shared_entries: int,
        round_size: int,
        stepsize: float,
        input_variance: float,
        noise_variance: float,
        byzantine_clients: Iterable[int] = (),
        attack_probability: float = 0.0,
        attack_variance: float = 0.0,
        mask_mode: MaskMode = "uniform",
        true_model: tuple[float, ...] | None = None,
    ) -> "NetworkSpec":
        """
        A network whose clients all share the same input and noise variance.
        """
        byzantine = set(byzantine_clients)
        return cls(
            num_clients=num_clients,
            dim=dim,
            shared_entries=shared_entries,
            round_size=round_size,
            stepsize=stepsize,
            attack_probability=attack_probability,
            attack_variance=attack_variance,
            clients=tuple(
                ClientSpec(
                    input_variance=input_variance,
                    noise_variance=noise_variance,
                    byzantine=k in byzantine,
                )
                for k in range(num_clients)
            ),
            true_model=true_model,
            mask_mode=mask_mode,
        )

    # --------------------------------------------------------------------------
    # DERIVED QUANTITIES

    @property
    def entry_probability(self) -> float:
        """p_e = M / D."""
        return self.shared_entries / self.dim

    @property
    def client_probability(self) -> float:
        """p_c = |S_n| / K."""
        return self.round_size / self.num_clients

    @property
    def byzantine_clients(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.clients) if c.byzantine)

    @cached_property
    def attack(self) -> AttackSpec:
        return AttackSpec(
            attack_probability=self.attack_probability,
            attack_variance=self.attack_variance,
            byzantine_set=self.byzantine_clients,
            num_clients=self.num_clients,
        )

    @cached_property
    def input_variances(self) -> np.ndarray:
        return np.array([c.input_variance for c in self.clients], dtype=np.float64)

    @cached_property
    def noise_variances(self) -> np.ndarray:
        return np.array([c.noise_variance for c in self.clients], dtype=np.float64)

    @cached_property
    def byzantine_mask(self) -> np.ndarray:
        return np.array([c.byzantine for c in self.clients], dtype=np.bool_)

    @cached_property
    def optimal_model(self) -> np.ndarray:
        assert self.true_model is not None
        return np.array(self.true_model, dtype=np.float64)

    def with_byzantine_clients(self, clients: Iterable[int]) -> "NetworkSpec":
        byzantine = set(clients)
        unknown = sorted(k for k in byzantine if not 0 <= k < self.num_clients)
        if unknown:
            raise ConfigurationError(
                f"byzantine clients must be in 0..{self.num_clients - 1}, got {unknown}"
            )
        return self.model_update(
            clients=tuple(
                c.model_update(byzantine=k in byzantine) for k, c in enumerate(self.clients)
            )
        )


__all__ = [
    "AttackSpec",
    "ClientSpec",
    "MaskMode",
    "NetworkSpec",
]
