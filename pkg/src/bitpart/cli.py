"""
Command-line entry point: run the power sweep of a scenario file and write the mean sum rates as CSV.

Exit codes are 0 on success, 1 for usage or configuration errors and 2 for runtime errors (I/O, MLflow tracking, solver
failures).
"""
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

import fsspec
import mlflow
import pandas as pd
from jsonargparse import ArgumentParser
from mlflow.exceptions import MlflowException

from bitpart.allocation import ConvergenceError
from bitpart.mlflow_helpers import MLFlowBatch, log_scenario, log_sweep_rows
from bitpart.scenario import ConfigError, parse_config
from bitpart.schemes import SchemeId
from bitpart.simulation import SweepPointError, SweepRow, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

CSV_COLUMNS = ["mu11_db", "scheme", "mean_sum_rate", "std_err", "trials"]
CSV_FLOAT_FORMAT = "%.9g"


@dataclass(frozen=True)
class RunManifest:
    """
    Everything one invocation needs.

    config_path: Scenario document, any fsspec URL.
    output_path: Local path of the CSV to write.
    schemes: Schemes to simulate.
    seed_override: Replaces the seed of the document.
    trials_override: Replaces the trial count of the document.
    log_level: Logging level name.
    mlflow_experiment: Log the run to this MLflow experiment when set.
    summary: Also print a table of the sweep to standard output.
    """

    config_path: str
    output_path: str
    schemes: tuple[SchemeId, ...] = tuple(SchemeId)
    seed_override: Optional[int] = None
    trials_override: Optional[int] = None
    log_level: str = "INFO"
    mlflow_experiment: Optional[str] = None
    summary: bool = False

    def __post_init__(self):
        if not self.config_path:
            raise ValueError("A config path is required")
        if not self.output_path:
            raise ValueError("An output path is required")
        if not self.schemes:
            raise ValueError("At least one scheme is required")


def parse_schemes(text: str) -> tuple[SchemeId, ...]:
    """Parse a comma-separated list of scheme names, keeping the first occurrence of each."""
    names = [name.strip() for name in text.split(",") if name.strip()]
    try:
        schemes = [SchemeId(name) for name in names]
    except ValueError as e:
        valid = ", ".join(scheme.value for scheme in SchemeId)
        raise ValueError(f"Unknown scheme in {text!r}, expected a subset of: {valid}") from e
    return tuple(dict.fromkeys(schemes))


def rows_to_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Rows sorted by power point then scheme name, in the CSV column layout."""
    records = [(row.mu11_db, row.scheme.value, row.mean_rate, row.std_err, row.trials) for row in rows]
    return pd.DataFrame.from_records(sorted(records, key=lambda record: (record[0], record[1])), columns=CSV_COLUMNS)


def write_csv(rows: Sequence[SweepRow], path: str):
    """Write the rows to `path` through a temporary file in the same directory, so no partial file is left behind."""
    frame = rows_to_frame(rows)
    directory = os.path.dirname(os.path.abspath(path))
    handle, temporary_path = tempfile.mkstemp(dir=directory, prefix=".bitpart-", suffix=".csv.tmp")
    try:
        with os.fdopen(handle, "w", newline="") as f:
            frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT)
        os.chmod(temporary_path, 0o644)
        os.replace(temporary_path, path)
    except BaseException:
        if os.path.exists(temporary_path):
            os.remove(temporary_path)
        raise


def read_csv(path: str) -> list[SweepRow]:
    frame = pd.read_csv(path)
    if list(frame.columns) != CSV_COLUMNS:
        raise ValueError(f"Unexpected CSV header {list(frame.columns)}, expected {CSV_COLUMNS}")
    return [
        SweepRow(
            mu11_db=float(record.mu11_db),
            scheme=SchemeId(record.scheme),
            mean_rate=float(record.mean_sum_rate),
            std_err=float(record.std_err),
            trials=int(record.trials),
        )
        for record in frame.itertuples(index=False)
    ]


def summary_table(rows: Sequence[SweepRow]) -> str:
    """Mean sum rate per power point (rows) and scheme (columns)."""
    frame = rows_to_frame(rows)
    table = frame.pivot(index="mu11_db", columns="scheme", values="mean_sum_rate")
    return table.to_string(float_format=lambda value: f"{value:.4f}")


def run(manifest: RunManifest) -> int:
    """Run the sweep described by `manifest` and write its CSV; returns the exit code."""
    try:
        with fsspec.open(manifest.config_path, "r") as f:
            config_text = f.read()
    except OSError as e:
        logger.error(f"Cannot read config {manifest.config_path}: {e}")
        return EXIT_USAGE

    try:
        cfg = parse_config(config_text, seed=manifest.seed_override, trials=manifest.trials_override)
    except ConfigError as e:
        logger.error(f"Invalid config {manifest.config_path}: {e}")
        return EXIT_USAGE

    logger.info(
        f"Sweeping mu11 over {cfg.sweep_db[0]:g}..{cfg.sweep_db[-1]:g} dB with {cfg.trials} trials per point for "
        f"{', '.join(scheme.value for scheme in manifest.schemes)}"
    )
    try:
        if manifest.mlflow_experiment is not None:
            mlflow.set_experiment(manifest.mlflow_experiment)
            with mlflow.start_run():
                log_scenario(cfg, config_text)
                rows = run_sweep(cfg, manifest.schemes)
                log_sweep_rows(rows, MLFlowBatch(batch_size=100))
        else:
            rows = run_sweep(cfg, manifest.schemes)
    except (SweepPointError, ConvergenceError) as e:
        logger.error(str(e))
        return EXIT_RUNTIME
    except (MlflowException, OSError) as e:
        logger.error(f"Tracking to MLflow experiment {manifest.mlflow_experiment} failed: {e}")
        return EXIT_RUNTIME

    try:
        write_csv(rows, manifest.output_path)
    except OSError as e:
        logger.error(f"Cannot write {manifest.output_path}: {e}")
        return EXIT_RUNTIME
    logger.info(f"Wrote {len(rows)} rows to {manifest.output_path}")

    if manifest.summary:
        print(summary_table(rows))
    return EXIT_OK


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bitpart", description=__doc__)
    parser.add_argument("--config", type=str, required=True, help="Scenario YAML document (any fsspec URL).")
    parser.add_argument("--out", type=str, required=True, help="CSV file to write.")
    parser.add_argument(
        "--schemes",
        type=str,
        default=",".join(scheme.value for scheme in SchemeId),
        help="Comma-separated schemes to simulate.",
    )
    parser.add_argument("--seed", type=Optional[int], default=None, help="Override the seed of the scenario.")
    parser.add_argument("--trials", type=Optional[int], default=None, help="Override the trial count of the scenario.")
    parser.add_argument("--log-level", type=str, default="INFO", help="Logging level.")
    parser.add_argument("--mlflow-experiment", type=Optional[str], default=None, help="Log the run to MLflow.")
    parser.add_argument("--summary", action="store_true", help="Print a table of the sweep to standard output.")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    level = logging.getLevelName(args.log_level.upper())
    if not isinstance(level, int):
        print(f"bitpart: unknown log level {args.log_level!r}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        manifest = RunManifest(
            config_path=args.config,
            output_path=args.out,
            schemes=parse_schemes(args.schemes),
            seed_override=args.seed,
            trials_override=args.trials,
            log_level=args.log_level,
            mlflow_experiment=args.mlflow_experiment,
            summary=args.summary,
        )
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE
    return run(manifest)
