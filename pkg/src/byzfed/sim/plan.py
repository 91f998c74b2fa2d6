# byzfed/sim/plan.py
import hashlib
import math
from collections.abc import Sequence
from typing import Literal

from pydantic import Field, SerializeAsAny, model_validator

from ..algorithms import FedAlgorithm, PsoFedAlgorithm
from ..core.error import ConfigurationError
from ..core.spec import NetworkSpec
from ..utils.immutable import ImmutableBaseModel
from ..utils.rng import MAX_SEED, byzantine_stream

type SweepParameter = Literal[
    "stepsize",
    "shared_entries",
    "round_size",
    "attack_probability",
    "attack_variance",
    "byzantine_count",
]

INTEGRAL_PARAMETERS: frozenset[str] = frozenset(
    {"shared_entries", "round_size", "byzantine_count"}
)


def byzantine_subset(seed: int, num_clients: int, count: int) -> tuple[int, ...]:
    """
    The first `count` clients of a seeded permutation, so the Byzantine sets
    of one seed are nested as the count grows.
    """
    if not 0 <= count <= num_clients:
        raise ConfigurationError(
            f"0 <= byzantine_count <= K violated: byzantine_count={count}, num_clients={num_clients}"
        )
    order = byzantine_stream(seed).permutation(num_clients)
    return tuple(sorted(int(k) for k in order[:count]))


class SweepAxis(ImmutableBaseModel):
    """
    One experiment per value; every other setting is shared.
    """

    parameter: SweepParameter
    values: tuple[float, ...]

    @model_validator(mode="after")
    def _check_values(self):
        if len(self.values) == 0:
            raise ConfigurationError(f"sweep over {self.parameter} has no values")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigurationError(f"sweep over {self.parameter} has non-finite values")
        if self.parameter in INTEGRAL_PARAMETERS and any(v != int(v) for v in self.values):
            raise ConfigurationError(
                f"sweep over {self.parameter} needs integer values, got {self.values}"
            )
        return self


class ExperimentPlan(ImmutableBaseModel):
    """
    Everything needed to reproduce an experiment: the network, the
    algorithm, the horizon and the root seed.
    """

    spec: NetworkSpec
    algorithm: SerializeAsAny[FedAlgorithm] = Field(default_factory=PsoFedAlgorithm)
    iterations: int = Field(default=3000, description="N, rounds per replica.")
    replicas: int = Field(default=100, description="R, independent replicas.")
    seed: int = 0
    sweep: SweepAxis | None = None
    window: int = Field(default=200, description="Trailing iterations of the steady-state estimates.")
    test_size: int = Field(default=50, description="Server test set size.")

    @model_validator(mode="after")
    def _check_plan(self):
        if self.window < 1:
            raise ConfigurationError(f"window >= 1 violated: window={self.window}")
        if self.iterations < self.window:
            raise ConfigurationError(
                f"iterations >= window violated: iterations={self.iterations}, window={self.window}"
            )
        if self.replicas < 1:
            raise ConfigurationError(f"replicas >= 1 violated: replicas={self.replicas}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.test_size < 1:
            raise ConfigurationError(f"test_size >= 1 violated: test_size={self.test_size}")
        return self

    @property
    def network(self) -> NetworkSpec:
        """The network as the algorithm runs it."""
        return self.algorithm.configure(self.spec)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()[:16]

    def at(self, parameter: SweepParameter, value: float) -> "ExperimentPlan":
        """
        The single experiment of this plan with `parameter` set to `value`.
        """
        if parameter == "byzantine_count":
            spec = self.spec.with_byzantine_clients(
                byzantine_subset(self.seed, self.spec.num_clients, int(value))
            )
        elif parameter in INTEGRAL_PARAMETERS:
            spec = self.spec.model_update(**{parameter: int(value)})
        else:
            spec = self.spec.model_update(**{parameter: float(value)})
        return self.model_update(spec=spec, sweep=None)

    def points(self) -> Sequence[tuple[float, "ExperimentPlan"]]:
        if self.sweep is None:
            raise ConfigurationError("plan declares no sweep axis")
        return [(value, self.at(self.sweep.parameter, value)) for value in self.sweep.values]

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        replicas: int | None = None,
        iterations: int | None = None,
    ) -> "ExperimentPlan":
        updates: dict = {}
        if seed is not None:
            updates["seed"] = seed
        if replicas is not None:
            updates["replicas"] = replicas
        if iterations is not None:
            updates["iterations"] = iterations
            updates["window"] = min(self.window, iterations)
        return self.model_update(**updates) if updates else self


__all__ = [
    "ExperimentPlan",
    "SweepAxis",
    "SweepParameter",
    "byzantine_subset",
]
