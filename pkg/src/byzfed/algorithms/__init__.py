# byzfed/algorithms/__init__.py
from .base import AlgorithmTypeInfo, ClientUpdate, FedAlgorithm, RoundOutcome, algorithm_names
from .onlinefed import OnlineFedAlgorithm, onlinefed_round
from .psofed import (
    PsoFedAlgorithm,
    psofed_client_step,
    psofed_round,
    psofed_server_aggregate,
)
from .signsgd import SignSgdAlgorithm, signsgd_round

__all__ = [
    "AlgorithmTypeInfo",
    "ClientUpdate",
    "FedAlgorithm",
    "OnlineFedAlgorithm",
    "PsoFedAlgorithm",
    "RoundOutcome",
    "SignSgdAlgorithm",
    "algorithm_names",
    "onlinefed_round",
    "psofed_client_step",
    "psofed_round",
    "psofed_server_aggregate",
    "signsgd_round",
]
