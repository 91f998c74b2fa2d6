# byzfed/__init__.py
from .algorithms import FedAlgorithm, OnlineFedAlgorithm, PsoFedAlgorithm, SignSgdAlgorithm
from .core import (
    AttackSpec,
    ClientSpec,
    ExperimentContext,
    FedState,
    NetworkSpec,
    UserException,
)
from .io import parse_config
from .sim import ExperimentPlan, RunMetrics, SweepAxis, run_experiment, run_replica, sweep
from .theory import TheoryOptions, analyze

__all__ = [
    "AttackSpec",
    "ClientSpec",
    "ExperimentContext",
    "ExperimentPlan",
    "FedAlgorithm",
    "FedState",
    "NetworkSpec",
    "OnlineFedAlgorithm",
    "PsoFedAlgorithm",
    "RunMetrics",
    "SignSgdAlgorithm",
    "SweepAxis",
    "TheoryOptions",
    "UserException",
    "analyze",
    "parse_config",
    "run_experiment",
    "run_replica",
    "sweep",
]
