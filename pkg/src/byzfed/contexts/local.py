# byzfed/contexts/local.py
import json
import os
import uuid

import numpy as np
from overrides import override

from ..core.context import ExperimentContext
from ..core.error import ExperimentErrors, UserException
from ..sim.experiment import RunMetrics
from ..sim.plan import ExperimentPlan
from ..sim.replica import ReplicaTraces
from ..sim.sweep import SweepRow


class LocalContext(ExperimentContext):
    """
    A context that keeps every experiment under a run directory on the
    local filesystem, one subdirectory per plan digest:

        <run_dir>/<digest>/plan.json
        <run_dir>/<digest>/replica-<i>.npz
        <run_dir>/<digest>/replica-<i>.error.json
        <run_dir>/<digest>/metrics.json

    Replicas and experiments already on disk are not run again, so an
    interrupted sweep resumes where it stopped.
    """

    def __init__(
        self,
        *,
        run_id: str | None = None,
        base_dir: str = "./local",
    ):
        if run_id is None:
            run_dir: str | None = None
            while run_dir is None or os.path.exists(run_dir):
                run_id = str(uuid.uuid4())
                run_dir = os.path.join(base_dir, run_id)
        else:
            run_dir = os.path.join(base_dir, run_id)
        os.makedirs(run_dir, exist_ok=True)
        self.run_id = run_id
        self.run_dir = run_dir

    def _idempotent_write(self, path: str, data: str):
        if os.path.exists(path):
            with open(path, "r") as f:
                assert f.read() == data, f"{path} already holds different content"
        else:
            with open(path, "x") as f:
                f.write(data)

    def experiment_dir(self, plan: ExperimentPlan) -> str:
        path = os.path.join(self.run_dir, plan.digest)
        os.makedirs(path, exist_ok=True)
        return path

    def plan_path(self, plan: ExperimentPlan) -> str:
        return os.path.join(self.experiment_dir(plan), "plan.json")

    def metrics_path(self, plan: ExperimentPlan) -> str:
        return os.path.join(self.experiment_dir(plan), "metrics.json")

    def errors_path(self, plan: ExperimentPlan) -> str:
        return os.path.join(self.experiment_dir(plan), "errors.json")

    def replica_path(self, plan: ExperimentPlan, replica_index: int) -> str:
        return os.path.join(self.experiment_dir(plan), f"replica-{replica_index}.npz")

    def replica_error_path(self, plan: ExperimentPlan, replica_index: int) -> str:
        return os.path.join(self.experiment_dir(plan), f"replica-{replica_index}.error.json")

    @property
    def rows_path(self) -> str:
        return os.path.join(self.run_dir, "rows.jsonl")

    @override
    async def on_experiment_start(
        self,
        *,
        plan: ExperimentPlan,
    ) -> RunMetrics | None:
        self._idempotent_write(path=self.plan_path(plan), data=plan.model_dump_json())

        metrics_path = self.metrics_path(plan)
        if os.path.exists(metrics_path):
            with open(metrics_path, "r") as f:
                return RunMetrics.model_validate_json(f.read())
        return None

    @override
    async def on_replica_start(
        self,
        *,
        plan: ExperimentPlan,
        replica_index: int,
    ) -> ReplicaTraces | None:
        path = self.replica_path(plan, replica_index)
        if not os.path.exists(path):
            return None
        try:
            with np.load(path) as saved:
                return ReplicaTraces(
                    replica_index=replica_index,
                    test_mse=saved["test_mse"],
                    network_mse=saved["network_mse"],
                    final_model=saved["final_model"],
                    steady_test_mse=float(saved["steady_test_mse"]),
                    steady_network_mse=float(saved["steady_network_mse"]),
                )
        except Exception as e:
            raise UserException(f"Failed to read cached replica {path}") from e

    @override
    async def on_replica_error(
        self,
        *,
        plan: ExperimentPlan,
        replica_index: int,
        exception: Exception,
    ) -> Exception | ReplicaTraces:
        message = exception.message if isinstance(exception, UserException) else None
        self._idempotent_write(
            path=self.replica_error_path(plan, replica_index),
            data=json.dumps({"replica_index": replica_index, "message": message}),
        )
        return exception

    @override
    async def on_replica_finish(
        self,
        *,
        plan: ExperimentPlan,
        replica_index: int,
        traces: ReplicaTraces,
    ) -> ReplicaTraces:
        path = self.replica_path(plan, replica_index)
        if not os.path.exists(path):
            partial = f"{path}.partial"
            with open(partial, "wb") as f:
                np.savez(
                    f,
                    test_mse=traces.test_mse,
                    network_mse=traces.network_mse,
                    final_model=traces.final_model,
                    steady_test_mse=traces.steady_test_mse,
                    steady_network_mse=traces.steady_network_mse,
                )
            os.replace(partial, path)
        return traces

    @override
    async def on_experiment_finish(
        self,
        *,
        plan: ExperimentPlan,
        metrics: RunMetrics,
        errors: ExperimentErrors,
    ) -> RunMetrics:
        self._idempotent_write(path=self.metrics_path(plan), data=metrics.model_dump_json())
        if errors.any():
            self._idempotent_write(path=self.errors_path(plan), data=errors.model_dump_json())
        return metrics

    @override
    async def on_sweep_point(
        self,
        *,
        plan: ExperimentPlan,
        row: SweepRow,
    ) -> None:
        with open(self.rows_path, "a") as f:
            f.write(row.model_dump_json() + "\n")


__all__ = [
    "LocalContext",
]
