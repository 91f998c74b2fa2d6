# byzfed/sim/__init__.py
from .experiment import RunMetrics, run_experiment, summarize
from .plan import ExperimentPlan, SweepAxis, SweepParameter, byzantine_subset
from .replica import DIVERGENCE_LIMIT, ReplicaTraces, TestSet, execute_replica, run_replica
from .sweep import SweepRow, predict, sweep

__all__ = [
    "DIVERGENCE_LIMIT",
    "ExperimentPlan",
    "ReplicaTraces",
    "RunMetrics",
    "SweepAxis",
    "SweepParameter",
    "SweepRow",
    "TestSet",
    "byzantine_subset",
    "execute_replica",
    "predict",
    "run_experiment",
    "run_replica",
    "summarize",
    "sweep",
]
