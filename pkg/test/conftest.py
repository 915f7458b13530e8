from typing import Any, Callable

import mlflow.tracking.fluent
import pytest
import yaml

from bitpart import default_scenario_text
from bitpart.scenario import NetworkConfig, parse_config


@pytest.fixture(autouse=True)
def fixture_isolate_mlflow_experiment(monkeypatch):
    """Keep the experiment chosen by `mlflow.set_experiment` in one test from leaking into the next."""
    monkeypatch.setattr(mlflow.tracking.fluent, "_active_experiment_id", None)
    monkeypatch.delenv("MLFLOW_EXPERIMENT_ID", raising=False)


@pytest.fixture(name="default_cfg")
def fixture_default_cfg() -> NetworkConfig:
    return parse_config(default_scenario_text())


@pytest.fixture(name="scenario_text")
def fixture_scenario_text() -> Callable[..., str]:
    """Factory for scenario documents: the packaged scenario with some parameters replaced (None removes one)."""

    def make(**changes: Any) -> str:
        document = yaml.safe_load(default_scenario_text())
        for key, value in changes.items():
            if value is None:
                document.pop(key, None)
            else:
                document[key] = value
        return yaml.safe_dump(document)

    return make


@pytest.fixture(name="small_cfg")
def fixture_small_cfg(scenario_text) -> NetworkConfig:
    """A short-horizon scenario over three power points with a handful of trials."""
    return parse_config(scenario_text(T=6, mu11_db_range=[10, 12], trials=4, codebook_refresh=2))
