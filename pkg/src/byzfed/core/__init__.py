# byzfed/core/__init__.py
from .context import ExperimentContext
from .data import DataSample, SampleBatch, generate_batch, generate_holdout, generate_sample
from .error import (
    ArgumentError,
    ConfigurationError,
    DegenerateConfigError,
    DivergenceError,
    ExperimentError,
    ExperimentErrors,
    InstabilityError,
    NumericError,
    ProtocolError,
    ReplicaException,
    UnsupportedLawError,
    UserException,
)
from .execution import ReplicaExecutor
from .metrics import network_mse, test_mse
from .spec import AttackSpec, ClientSpec, MaskMode, NetworkSpec
from .state import FedState

__all__ = [
    "ArgumentError",
    "AttackSpec",
    "ClientSpec",
    "ConfigurationError",
    "DataSample",
    "DegenerateConfigError",
    "DivergenceError",
    "ExperimentContext",
    "ExperimentError",
    "ExperimentErrors",
    "FedState",
    "InstabilityError",
    "MaskMode",
    "NetworkSpec",
    "NumericError",
    "ProtocolError",
    "ReplicaException",
    "ReplicaExecutor",
    "SampleBatch",
    "UnsupportedLawError",
    "UserException",
    "generate_batch",
    "generate_holdout",
    "generate_sample",
    "network_mse",
    "test_mse",
]
