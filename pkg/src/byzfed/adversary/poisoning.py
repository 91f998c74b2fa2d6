# byzfed/adversary/poisoning.py
import numpy as np

from ..core.spec import AttackSpec


def corrupt_model(
    local_model: np.ndarray,
    client_id: int,
    spec: AttackSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    w' = w + beta_k tau delta, with tau ~ Bernoulli(p_a) and
    delta ~ N(0, sigma_B^2 I). Honest clients never touch the stream.
    """
    local_model = np.asarray(local_model, dtype=np.float64)
    if client_id not in spec.byzantine_set:
        return local_model
    if rng.random() >= spec.attack_probability:
        return local_model
    delta = rng.standard_normal(local_model.shape[0]) * np.sqrt(spec.attack_variance)
    return local_model + delta


def corrupt_uploads(
    uploads: np.ndarray,
    clients: np.ndarray,
    spec: AttackSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Batch form of corrupt_model over the rows of `uploads`, one row per
    client in `clients`. Draws happen only for Byzantine rows, in row order.
    """
    byzantine = np.isin(clients, spec.byzantine_set)
    if not byzantine.any():
        return uploads
    rows = np.flatnonzero(byzantine)
    attacked = rng.random(rows.shape[0]) < spec.attack_probability
    delta = rng.standard_normal((rows.shape[0], uploads.shape[1])) * np.sqrt(spec.attack_variance)
    if not attacked.any():
        return uploads
    corrupted = uploads.copy()
    corrupted[rows[attacked]] += delta[attacked]
    return corrupted


def attack_second_moment(spec: AttackSpec, num_clients: int, dim: int) -> np.ndarray:
    """
    Diagonal of Omega_delta = bdiag{0, beta_k p_a sigma_B^2 I_D}, length (K+1)D.
    """
    diagonal = np.zeros((num_clients + 1, dim))
    for k in spec.byzantine_set:
        diagonal[k + 1] = spec.attack_probability * spec.attack_variance
    return diagonal.reshape(-1)


__all__ = [
    "attack_second_moment",
    "corrupt_model",
    "corrupt_uploads",
]
