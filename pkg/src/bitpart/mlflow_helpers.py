import time
from pathlib import Path
from queue import Queue
from tempfile import TemporaryDirectory
from typing import TYPE_CHECKING, Sequence

import mlflow

if TYPE_CHECKING:
    from bitpart.scenario import NetworkConfig
    from bitpart.simulation import SweepRow


class MLFlowBatch:
    """
    Collects metrics of the active MLflow run and sends them with one `log_batch` call per `batch_size` metrics.

    Call `flush` once logging is done to send what is left.
    """

    def __init__(self, batch_size: int) -> None:
        if batch_size < 1:
            raise ValueError(f"Batch size must be positive, got {batch_size}")
        active_run = mlflow.active_run()
        if active_run is None:
            raise ValueError("No active ML flow run.")
        self._run_id = active_run.info.run_id
        self._client = mlflow.tracking.MlflowClient()
        self._pending: Queue = Queue(maxsize=batch_size)

    def log_metric(self, key: str, value: float, step: int = 0):
        timestamp_ms = int(time.time() * 1000)
        self._pending.put(mlflow.entities.Metric(key=key, value=float(value), timestamp=timestamp_ms, step=step))
        if self._pending.full():
            self.flush()

    def flush(self):
        metrics = []
        while not self._pending.empty():
            metrics.append(self._pending.get())
        if metrics:
            self._client.log_batch(run_id=self._run_id, metrics=metrics)


def log_sweep_rows(rows: Sequence["SweepRow"], batch: MLFlowBatch):
    """Log the mean sum rate and standard error of every row, with the power point in dB as the step."""
    for row in rows:
        step = int(round(row.mu11_db))
        batch.log_metric(f"mean_sum_rate/{row.scheme.value}", row.mean_rate, step=step)
        batch.log_metric(f"std_err/{row.scheme.value}", row.std_err, step=step)
    batch.flush()


def log_scenario(cfg: "NetworkConfig", config_text: str, config_filename: str = "scenario.yaml"):
    """Log the scalar scenario parameters as params and the scenario document as an artifact of the active run."""
    mlflow.log_params(
        {
            "M": cfg.M,
            "K": cfg.K,
            "Ts": cfg.Ts,
            "T": cfg.T,
            "Bs": cfg.Bs,
            "fc": cfg.fc,
            "trials": cfg.trials,
            "codebook_refresh": cfg.codebook_refresh,
            "seed": cfg.seed,
            "mu11_db_range": f"{cfg.mu11_db_range[0]:g}..{cfg.mu11_db_range[1]:g}",
        }
    )
    with TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / config_filename
        path.write_text(config_text)
        mlflow.log_artifact(str(path))
