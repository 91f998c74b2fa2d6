# byzfed/io/config.py
"""
Experiment config files.

A config is a JSON document with four sections whose keys mirror the field
names of NetworkSpec, the attack parameters and ExperimentPlan:

    {
      "network":    {"num_clients": 50, "dim": 5, "shared_entries": 1, ...},
      "attack":     {"attack_probability": 0.2, "attack_variance": 0.5,
                     "byzantine_count": 5},
      "algorithm":  {"type": "psofed"},
      "experiment": {"iterations": 3000, "replicas": 100, "seed": 0,
                     "sweep": {"parameter": "stepsize", "values": [0.01, 0.05]}}
    }

Every key is optional; unknown keys are rejected. Client statistics are
either given (one value for every client, or a list with one value per
client) or drawn once from the seed's setup stream within the configured
ranges. parse_config records the drawn values in the plan, so dumping the
plan back gives a config that replays the same network exactly.
"""

import os
from pathlib import Path
from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, Field, SerializeAsAny, ValidationError, model_validator

from ..algorithms import FedAlgorithm, PsoFedAlgorithm
from ..core.error import ConfigurationError
from ..core.spec import ClientSpec, MaskMode, NetworkSpec
from ..sim.plan import ExperimentPlan, SweepAxis, byzantine_subset
from ..utils.immutable import ImmutableBaseModel
from ..utils.rng import setup_stream
from .results import write_atomic

type VarianceSetting = float | tuple[float, ...]

INPUT_VARIANCE_RANGE = (0.2, 1.2)
NOISE_VARIANCE_RANGE = (0.005, 0.025)


def _check_range(name: str, bounds: tuple[float, float]):
    low, high = bounds
    if not 0 <= low <= high:
        raise ConfigurationError(f"{name} must satisfy 0 <= low <= high, got {bounds}")


class NetworkSection(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    num_clients: int = 50
    dim: int = 5
    shared_entries: int = 1
    round_size: int = 5
    stepsize: float = 0.15
    input_variance: VarianceSetting | None = None
    noise_variance: VarianceSetting | None = None
    input_variance_range: tuple[float, float] = INPUT_VARIANCE_RANGE
    noise_variance_range: tuple[float, float] = NOISE_VARIANCE_RANGE
    true_model: tuple[float, ...] | None = None
    mask_mode: MaskMode = "uniform"

    @model_validator(mode="after")
    def _check_ranges(self):
        _check_range("network.input_variance_range", self.input_variance_range)
        _check_range("network.noise_variance_range", self.noise_variance_range)
        return self


class AttackSection(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    attack_probability: float = 0.0
    attack_variance: float = 0.0
    byzantine_count: int | None = Field(
        default=None,
        description="Number of Byzantine clients, drawn from the seed.",
    )
    byzantine_clients: tuple[int, ...] | None = Field(
        default=None,
        description="Explicit Byzantine client ids.",
    )

    @model_validator(mode="after")
    def _check_clients(self):
        if self.byzantine_count is not None and self.byzantine_clients is not None:
            raise ConfigurationError(
                "attack.byzantine_count and attack.byzantine_clients are mutually exclusive"
            )
        return self


class ExperimentSection(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    iterations: int = 3000
    replicas: int = 100
    seed: int = 0
    window: int = 200
    test_size: int = 50
    sweep: SweepAxis | None = None


class ConfigFile(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="forbid")

    network: NetworkSection = Field(default_factory=NetworkSection)
    attack: AttackSection = Field(default_factory=AttackSection)
    algorithm: SerializeAsAny[FedAlgorithm] = Field(default_factory=PsoFedAlgorithm)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)

    def to_plan(self) -> ExperimentPlan:
        network = self.network
        seed = self.experiment.seed
        rng = setup_stream(seed)
        # input variances are drawn first, then noise variances
        inputs = _resolve_variances(
            "network.input_variance",
            network.input_variance,
            network.input_variance_range,
            network.num_clients,
            rng,
        )
        noises = _resolve_variances(
            "network.noise_variance",
            network.noise_variance,
            network.noise_variance_range,
            network.num_clients,
            rng,
        )
        spec = NetworkSpec(
            num_clients=network.num_clients,
            dim=network.dim,
            shared_entries=network.shared_entries,
            round_size=network.round_size,
            stepsize=network.stepsize,
            attack_probability=self.attack.attack_probability,
            attack_variance=self.attack.attack_variance,
            clients=tuple(
                ClientSpec(input_variance=float(x), noise_variance=float(v))
                for x, v in zip(inputs, noises)
            ),
            true_model=network.true_model,
            mask_mode=network.mask_mode,
        )
        if self.attack.byzantine_clients is not None:
            spec = spec.with_byzantine_clients(self.attack.byzantine_clients)
        elif self.attack.byzantine_count is not None:
            spec = spec.with_byzantine_clients(
                byzantine_subset(seed, network.num_clients, self.attack.byzantine_count)
            )
        return ExperimentPlan(
            spec=spec,
            algorithm=self.algorithm,
            iterations=self.experiment.iterations,
            replicas=self.experiment.replicas,
            seed=seed,
            sweep=self.experiment.sweep,
            window=self.experiment.window,
            test_size=self.experiment.test_size,
        )

    @classmethod
    def from_plan(cls, plan: ExperimentPlan) -> "ConfigFile":
        """The config that replays `plan`, with every client listed."""
        spec = plan.spec
        return cls(
            network=NetworkSection(
                num_clients=spec.num_clients,
                dim=spec.dim,
                shared_entries=spec.shared_entries,
                round_size=spec.round_size,
                stepsize=spec.stepsize,
                input_variance=tuple(c.input_variance for c in spec.clients),
                noise_variance=tuple(c.noise_variance for c in spec.clients),
                true_model=spec.true_model,
                mask_mode=spec.mask_mode,
            ),
            attack=AttackSection(
                attack_probability=spec.attack_probability,
                attack_variance=spec.attack_variance,
                byzantine_clients=spec.byzantine_clients,
            ),
            algorithm=plan.algorithm,
            experiment=ExperimentSection(
                iterations=plan.iterations,
                replicas=plan.replicas,
                seed=plan.seed,
                window=plan.window,
                test_size=plan.test_size,
                sweep=plan.sweep,
            ),
        )


def _resolve_variances(
    name: str,
    setting: VarianceSetting | None,
    bounds: tuple[float, float],
    num_clients: int,
    rng: np.random.Generator,
) -> np.ndarray:
    if setting is None:
        low, high = bounds
        return rng.uniform(low, high, size=num_clients)
    if isinstance(setting, tuple):
        if len(setting) != num_clients:
            raise ConfigurationError(
                f"{name} must list num_clients={num_clients} values, got {len(setting)}"
            )
        return np.array(setting, dtype=np.float64)
    return np.full(num_clients, float(setting))


def _describe(e: ValidationError) -> str:
    problems = []
    for error in e.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        problems.append(f"{location}: {error['msg']}")
    return "; ".join(problems)


def load_config(text: str) -> ConfigFile:
    try:
        return ConfigFile.model_validate_json(text)
    except ValidationError as e:
        raise ConfigurationError(f"invalid config: {_describe(e)}") from e


def read_config(path: str | os.PathLike) -> ConfigFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e.strerror}") from e
    return load_config(text)


def parse_config(path: str | os.PathLike) -> ExperimentPlan:
    """
    Reads and validates a config file. Errors name the offending key and
    the violated constraint.
    """
    return read_config(path).to_plan()


def dump_config(plan: ExperimentPlan) -> str:
    return ConfigFile.from_plan(plan).model_dump_json(indent=2)


def write_config(plan: ExperimentPlan, path: str | os.PathLike):
    write_atomic(path, dump_config(plan) + "\n")


__all__ = [
    "AttackSection",
    "ConfigFile",
    "ExperimentSection",
    "NetworkSection",
    "dump_config",
    "load_config",
    "parse_config",
    "read_config",
    "write_config",
]
