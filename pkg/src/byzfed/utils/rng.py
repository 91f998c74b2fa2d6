# byzfed/utils/rng.py
"""
Random stream derivation.

Every stream is a numpy Generator seeded from one root seed through
SeedSequence spawn keys, so a replica's draws depend only on
(seed, replica_index) and never on execution order:

    (0, i)      replica i; spawns child 0 (data and schedule) and child 1 (attack)
    (1,)        per-experiment setup (client variance draws)
    (2,)        server holdout (test) set
    (3,)        Byzantine client selection
"""

from typing import NamedTuple

import numpy as np

REPLICA_NAMESPACE = 0
SETUP_NAMESPACE = 1
HOLDOUT_NAMESPACE = 2
BYZANTINE_NAMESPACE = 3

MAX_SEED = 2**64 - 1


class ReplicaStreams(NamedTuple):
    data: np.random.Generator
    attack: np.random.Generator


def _sequence(seed: int, *spawn_key: int) -> np.random.SeedSequence:
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.SeedSequence(seed, spawn_key=spawn_key)


def replica_streams(seed: int, replica_index: int) -> ReplicaStreams:
    data, attack = _sequence(seed, REPLICA_NAMESPACE, replica_index).spawn(2)
    return ReplicaStreams(
        data=np.random.default_rng(data),
        attack=np.random.default_rng(attack),
    )


def setup_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, SETUP_NAMESPACE))


def holdout_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, HOLDOUT_NAMESPACE))


def byzantine_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, BYZANTINE_NAMESPACE))


__all__ = [
    "MAX_SEED",
    "ReplicaStreams",
    "byzantine_stream",
    "replica_streams",
    "setup_stream",
    "holdout_stream",
]
