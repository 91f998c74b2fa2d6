# byzfed/execution/__init__.py
from .serial import SerialReplicaExecutor
from .threaded import ThreadedReplicaExecutor, worker_count

__all__ = [
    "SerialReplicaExecutor",
    "ThreadedReplicaExecutor",
    "worker_count",
]
