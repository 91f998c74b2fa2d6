# byzfed/io/presets.py
"""
Packaged experiments at desk scale: full-size networks with fewer
replicas, one sweep per series.
"""

from collections.abc import Callable, Sequence

from ..algorithms import FedAlgorithm, OnlineFedAlgorithm, PsoFedAlgorithm, SignSgdAlgorithm
from ..core.error import ConfigurationError
from ..sim.plan import ExperimentPlan, SweepAxis, SweepParameter
from ..theory.options import TheoryOptions
from ..utils.immutable import ImmutableBaseModel
from .config import AttackSection, ConfigFile, ExperimentSection, NetworkSection

DESK_REPLICAS = 20
STEPSIZE_GRID = (0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.12, 0.16)


class PresetSeries(ImmutableBaseModel):
    label: str
    plan: ExperimentPlan


class Preset(ImmutableBaseModel):
    name: str
    description: str
    series: tuple[PresetSeries, ...]
    options: TheoryOptions = TheoryOptions()

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        replicas: int | None = None,
        iterations: int | None = None,
    ) -> "Preset":
        return self.model_update(
            series=tuple(
                s.model_update(
                    plan=s.plan.with_overrides(seed=seed, replicas=replicas, iterations=iterations)
                )
                for s in self.series
            )
        )


def _plan(
    *,
    parameter: SweepParameter,
    values: Sequence[float],
    algorithm: FedAlgorithm | None = None,
    num_clients: int = 50,
    shared_entries: int = 1,
    stepsize: float = 0.15,
    byzantine_count: int = 0,
    attack_probability: float = 0.0,
    attack_variance: float = 0.0,
    replicas: int = DESK_REPLICAS,
    iterations: int = 3000,
) -> ExperimentPlan:
    config = ConfigFile(
        network=NetworkSection(
            num_clients=num_clients,
            shared_entries=shared_entries,
            stepsize=stepsize,
        ),
        attack=AttackSection(
            attack_probability=attack_probability,
            attack_variance=attack_variance,
            byzantine_count=byzantine_count,
        ),
        algorithm=algorithm if algorithm is not None else PsoFedAlgorithm(),
        experiment=ExperimentSection(
            iterations=iterations,
            replicas=replicas,
            sweep=SweepAxis(parameter=parameter, values=tuple(values)),
        ),
    )
    return config.to_plan()


def _series(label: str, plan: ExperimentPlan) -> PresetSeries:
    return PresetSeries(label=label, plan=plan)


# ------------------------------------------------------------------------------
# PRESETS


def byzantine_count_sweep() -> Preset:
    def plan(algorithm: FedAlgorithm) -> ExperimentPlan:
        return _plan(
            parameter="byzantine_count",
            values=(0, 5, 10, 15, 20),
            algorithm=algorithm,
            num_clients=100,
            attack_probability=1.0,
            attack_variance=0.25,
            replicas=10,
        )

    return Preset(
        name="byzantine-count",
        description="Steady-state test MSE against the number of Byzantine clients (K=100, p_a=1, sigma_B^2=0.25).",
        series=(
            _series("psofed", plan(PsoFedAlgorithm())),
            _series("onlinefed", plan(OnlineFedAlgorithm())),
            _series("signsgd", plan(SignSgdAlgorithm(stepsize=0.08))),
        ),
    )


def shared_entries_sweep() -> Preset:
    return Preset(
        name="shared-entries",
        description="Steady-state test MSE against M (sigma_B^2=0.5, p_a=0.2).",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="shared_entries",
                    values=(1, 2, 3, 4, 5),
                    byzantine_count=count,
                    attack_probability=0.2,
                    attack_variance=0.5,
                ),
            )
            for count in (5, 15)
        ),
    )


def attack_variance_sweep() -> Preset:
    return Preset(
        name="attack-variance",
        description="Network MSE against the attack variance (p_a=0.2), with theory.",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="attack_variance",
                    values=(0.0, 0.25, 0.5, 0.75, 1.0),
                    byzantine_count=count,
                    attack_probability=0.2,
                ),
            )
            for count in (5, 15)
        ),
        options=TheoryOptions(max_clients=50),
    )


def attack_probability_by_sharing() -> Preset:
    return Preset(
        name="attack-probability-sharing",
        description="Steady-state test MSE against p_a for M=1 and M=5 (5 Byzantine clients, sigma_B^2=0.25).",
        series=tuple(
            _series(
                f"m{shared}",
                _plan(
                    parameter="attack_probability",
                    values=(0.2, 0.4, 0.6, 0.8, 1.0),
                    shared_entries=shared,
                    byzantine_count=5,
                    attack_variance=0.25,
                ),
            )
            for shared in (1, 5)
        ),
    )


def attack_probability_by_count() -> Preset:
    return Preset(
        name="attack-probability-count",
        description="Steady-state test MSE against p_a for 5 and 15 Byzantine clients (sigma_B^2=0.25).",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="attack_probability",
                    values=(0.2, 0.4, 0.6, 0.8, 1.0),
                    byzantine_count=count,
                    attack_variance=0.25,
                ),
            )
            for count in (5, 15)
        ),
    )


def stepsize_sweep() -> Preset:
    return Preset(
        name="stepsize",
        description="Network MSE against the stepsize with and without Byzantine clients (p_a=0.25, sigma_B^2=0.25).",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="stepsize",
                    values=STEPSIZE_GRID,
                    byzantine_count=count,
                    attack_probability=0.25,
                    attack_variance=0.25,
                ),
            )
            for count in (10, 0)
        ),
        options=TheoryOptions(max_clients=50),
    )


def stepsize_by_variance() -> Preset:
    return Preset(
        name="stepsize-variance",
        description="Network MSE against the stepsize for several attack variances (5 Byzantine clients, p_a=0.25).",
        series=tuple(
            _series(
                f"variance{variance:g}",
                _plan(
                    parameter="stepsize",
                    values=STEPSIZE_GRID,
                    byzantine_count=5,
                    attack_probability=0.25,
                    attack_variance=variance,
                ),
            )
            for variance in (0.5, 0.25, 0.0)
        ),
        options=TheoryOptions(max_clients=50),
    )


def stepsize_small_step() -> Preset:
    return Preset(
        name="stepsize-small-step",
        description="Network MSE against the stepsize next to the small-stepsize theory (p_a=0.25, sigma_B^2=0.5).",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="stepsize",
                    values=STEPSIZE_GRID,
                    byzantine_count=count,
                    attack_probability=0.25,
                    attack_variance=0.5,
                ),
            )
            for count in (10, 0)
        ),
        options=TheoryOptions(max_clients=50, small_step_approx=True),
    )


def mse_terms_sweep() -> Preset:
    return Preset(
        name="mse-terms",
        description="The gradient-noise and attack terms of the steady-state MSE against M (sigma_B^2=0.5, p_a=0.2).",
        series=tuple(
            _series(
                f"byzantine{count}",
                _plan(
                    parameter="shared_entries",
                    values=(1, 2, 3, 4, 5),
                    byzantine_count=count,
                    attack_probability=0.2,
                    attack_variance=0.5,
                    replicas=5,
                ),
            )
            for count in (5, 15)
        ),
        options=TheoryOptions(max_clients=50),
    )


def reference() -> Preset:
    """The small network on which theory and simulation must agree within 10%."""
    config = ConfigFile(
        network=NetworkSection(
            num_clients=10,
            dim=5,
            shared_entries=1,
            round_size=2,
            stepsize=0.05,
            input_variance=0.7,
            noise_variance=0.01,
        ),
        attack=AttackSection(
            attack_probability=0.2,
            attack_variance=0.5,
            byzantine_count=2,
        ),
        experiment=ExperimentSection(
            iterations=2000,
            replicas=200,
            window=200,
            sweep=SweepAxis(parameter="stepsize", values=(0.05,)),
        ),
    )
    return Preset(
        name="reference",
        description="K=10 network for the theory/simulation agreement check.",
        series=(_series("psofed", config.to_plan()),),
    )


PRESETS: dict[str, Callable[[], Preset]] = {
    "byzantine-count": byzantine_count_sweep,
    "shared-entries": shared_entries_sweep,
    "attack-variance": attack_variance_sweep,
    "attack-probability-sharing": attack_probability_by_sharing,
    "attack-probability-count": attack_probability_by_count,
    "stepsize": stepsize_sweep,
    "stepsize-variance": stepsize_by_variance,
    "stepsize-small-step": stepsize_small_step,
    "mse-terms": mse_terms_sweep,
    "reference": reference,
}

# numbered names, fig1 through fig9, in the order above
PRESET_ALIASES: dict[str, str] = {
    f"fig{number}": name for number, name in enumerate(list(PRESETS)[:9], start=1)
}


def preset_names() -> list[str]:
    return sorted(PRESETS) + sorted(PRESET_ALIASES)


def get_preset(name: str) -> Preset:
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        raise ConfigurationError(f'unknown preset "{name}", expected one of {preset_names()}')
    return PRESETS[name]()


__all__ = [
    "PRESETS",
    "PRESET_ALIASES",
    "Preset",
    "PresetSeries",
    "get_preset",
    "preset_names",
]
