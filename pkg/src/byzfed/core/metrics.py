# byzfed/core/metrics.py
from collections.abc import Sequence

import numpy as np

from .error import ArgumentError


def test_mse(
    global_model: np.ndarray,
    test_inputs: np.ndarray,
    test_responses: np.ndarray,
) -> float:
    """
    (1/N_t) ||y - X w||^2 over the server's test set; inputs are rows.
    """
    test_inputs = np.atleast_2d(np.asarray(test_inputs, dtype=np.float64))
    test_responses = np.asarray(test_responses, dtype=np.float64)
    if test_responses.size == 0:
        raise ArgumentError("test set is empty")
    if test_inputs.shape[0] != test_responses.shape[0]:
        raise ArgumentError(
            f"test set has {test_inputs.shape[0]} inputs but {test_responses.shape[0]} responses"
        )
    residual = test_responses - test_inputs @ global_model
    return float(residual @ residual) / residual.shape[0]


# not a pytest test
test_mse.__test__ = False  # type: ignore[attr-defined]


def network_mse(per_client_errors: Sequence[Sequence[float]] | np.ndarray, window: int) -> float:
    """
    Mean over clients of the mean squared local error over the last
    `window` iterations.
    """
    if window <= 0:
        raise ArgumentError(f"window must be positive, got {window}")
    streams = [np.asarray(errors, dtype=np.float64) for errors in per_client_errors]
    if len(streams) == 0:
        raise ArgumentError("no client error streams")
    short = [k for k, errors in enumerate(streams) if errors.shape[0] < window]
    if short:
        raise ArgumentError(f"clients {short} have fewer than {window} recorded errors")
    tails = np.stack([errors[-window:] for errors in streams])
    return float(np.mean(np.mean(tails**2, axis=1)))


__all__ = [
    "network_mse",
    "test_mse",
]
