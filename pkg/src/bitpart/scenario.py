"""
Scenario configuration: the YAML file schema, the validated `NetworkConfig` it is converted into, and `parse_config`.

File values are given in km/h, ms and dB; `NetworkConfig` stores SI units and
linear powers.
"""
import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional

import yaml
from dataclasses_json import dataclass_json

from bitpart.allocation.mfp import MAX_BITS_PER_LINK
from bitpart.allocation.newton import NewtonConfig

logger = logging.getLogger(__name__)

DEFAULT_CARRIER_HZ = 2.0e9
SPEED_OF_LIGHT = 299792458.0

Matrix = tuple[tuple[float, ...], ...]


class ConfigError(ValueError):
    """A configuration value is missing, malformed or violates a scenario invariant."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def kmph_to_mps(value: float) -> float:
    return value / 3.6


@dataclass_json
@dataclass(frozen=True)
class ScenarioConfig:
    """
    The on-disk scenario document.

    M: Antennas per base station.
    K: Number of cells (one user per cell).
    Ts_ms: Subframe duration in milliseconds.
    T: Feedback horizon in subframes.
    velocities_kmph: Velocity of each user in km/h; link (i, j) uses the velocity of the user served by
        station j.
    Bs: Feedback bit budget per user.
    mu11_db_range: Inclusive [start, stop] of the power sweep of the first user, in 1 dB steps.
    cross_offsets_db: Offsets of the cross powers of user i relative to mu_11, applied cyclically to stations
        i+1, i+2, ... (mod K).
    mu_offsets_db: Optional explicit K×K matrix of mu_ij - mu_11 in dB; overrides `cross_offsets_db`.
    fc_hz: Carrier frequency.
    c_mps: Propagation speed.
    trials: Monte Carlo trials per sweep point and scheme.
    codebook_refresh: Trials between codebook regenerations.
    seed: Master seed.
    max_bits_per_link: Largest codebook exponent any link may use.
    newton: Settings of the feedback-period solver.
    """

    M: Optional[int] = None
    K: Optional[int] = None
    Ts_ms: Optional[float] = None
    T: Optional[int] = None
    velocities_kmph: Optional[list[float]] = None
    Bs: Optional[int] = None
    mu11_db_range: list[float] = field(default_factory=lambda: [10.0, 19.0])
    cross_offsets_db: list[float] = field(default_factory=lambda: [-2.0, -3.0])
    mu_offsets_db: Optional[list[list[float]]] = None
    fc_hz: float = DEFAULT_CARRIER_HZ
    c_mps: float = SPEED_OF_LIGHT
    trials: int = 500
    codebook_refresh: int = 50
    seed: int = 0
    max_bits_per_link: int = MAX_BITS_PER_LINK
    newton: NewtonConfig = field(default_factory=NewtonConfig)


MANDATORY_FIELDS = ("M", "K", "Ts_ms", "T", "velocities_kmph", "Bs")


@dataclass(frozen=True)
class NetworkConfig:
    """All parameters of one scenario at one point of the power sweep, in SI units and linear powers."""

    M: int
    K: int
    mu: Matrix
    v: Matrix
    fc: float
    c: float
    Ts: float
    T: int
    Bs: int
    trials: int
    codebook_refresh: int
    seed: int
    mu11_db_range: tuple[float, float] = (10.0, 19.0)
    mu_offsets_db: Optional[Matrix] = None
    max_bits_per_link: int = MAX_BITS_PER_LINK
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if self.M < 2:
            raise ConfigError("M", f"needs at least 2 antennas, got {self.M}")
        if self.K < 2:
            raise ConfigError("K", f"needs at least 2 cells, got {self.K}")
        if self.M != self.K:
            raise ConfigError("M", f"zero-forcing with a unique null direction requires M = K, got M={self.M}, K={self.K}")
        _check_square("mu", self.mu, self.K)
        _check_square("v", self.v, self.K)
        if any(value <= 0 for row in self.mu for value in row):
            raise ConfigError("mu", "all powers must be positive")
        if any(value < 0 for row in self.v for value in row):
            raise ConfigError("v", "velocities must be nonnegative")
        if self.fc <= 0:
            raise ConfigError("fc", f"carrier frequency must be positive, got {self.fc}")
        if self.c <= 0:
            raise ConfigError("c", f"propagation speed must be positive, got {self.c}")
        if self.Ts <= 0:
            raise ConfigError("Ts", f"subframe duration must be positive, got {self.Ts}")
        if self.T < 1:
            raise ConfigError("T", f"horizon must be at least one subframe, got {self.T}")
        if self.Bs < 0:
            raise ConfigError("Bs", f"bit budget must be nonnegative, got {self.Bs}")
        if self.Bs > self.max_bits_per_link * (self.K - 1):
            raise ConfigError("Bs", f"budget {self.Bs} exceeds {self.max_bits_per_link} bits on each of {self.K - 1} links")
        if self.trials < 1:
            raise ConfigError("trials", f"needs at least one trial, got {self.trials}")
        if self.seed < 0:
            raise ConfigError("seed", f"must be nonnegative, got {self.seed}")
        if not 0 <= self.max_bits_per_link <= MAX_BITS_PER_LINK:
            raise ConfigError("max_bits_per_link", f"must lie in [0, {MAX_BITS_PER_LINK}], got {self.max_bits_per_link}")
        if self.codebook_refresh < 1:
            raise ConfigError("codebook_refresh", f"must be at least 1, got {self.codebook_refresh}")
        if self.mu11_db_range[0] > self.mu11_db_range[1]:
            raise ConfigError("mu11_db_range", f"start exceeds stop in {self.mu11_db_range}")
        if self.mu_offsets_db is not None:
            _check_square("mu_offsets_db", self.mu_offsets_db, self.K)

    @property
    def sweep_db(self) -> list[float]:
        """The μ_11 values of the power sweep, in dB."""
        start, stop = self.mu11_db_range
        return [start + step for step in range(int(stop - start) + 1)]

    def with_mu11_db(self, mu11_db: float) -> "NetworkConfig":
        """Return the configuration with the power matrix completed for the given μ_11."""
        assert self.mu_offsets_db is not None
        mu = tuple(tuple(db_to_linear(mu11_db + offset) for offset in row) for row in self.mu_offsets_db)
        return replace(self, mu=mu)


def cyclic_offsets(K: int, cross_offsets_db: list[float]) -> Matrix:
    """Build the K×K dB offsets where user i sees station (i + k) mod K at `cross_offsets_db[k - 1]`."""
    if len(cross_offsets_db) != K - 1:
        raise ConfigError("cross_offsets_db", f"needs {K - 1} entries, got {len(cross_offsets_db)}")
    offsets = [[0.0] * K for _ in range(K)]
    for i in range(K):
        for k, offset in enumerate(cross_offsets_db, start=1):
            offsets[i][(i + k) % K] = float(offset)
    return tuple(tuple(row) for row in offsets)


def parse_config(text: str, **overrides: Any) -> NetworkConfig:
    """
    Parse a YAML scenario document into a `NetworkConfig` at the first point of its power sweep.

    Args:
        text: The YAML document.
        **overrides: Values replacing those of the document (e.g. `seed`, `trials`), in file units.

    Returns:
        The validated configuration.
    """
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError("<document>", f"not valid YAML: {e}") from e
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("<document>", "expected a mapping of parameters")
    document.update({key: value for key, value in overrides.items() if value is not None})

    known = {f.name for f in fields(ScenarioConfig)}
    if unknown := sorted(set(document) - known):
        raise ConfigError(unknown[0], "unknown parameter")
    for name in MANDATORY_FIELDS:
        if document.get(name) is None:
            raise ConfigError(name, "missing mandatory parameter")

    newton = _newton_config(document.pop("newton", None))
    try:
        scenario = ScenarioConfig.from_dict(document)  # type: ignore  # pylint: disable=no-member
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError("<document>", f"malformed parameters: {e}") from e
    return scenario_to_network(replace(scenario, newton=newton))


def scenario_to_network(scenario: ScenarioConfig) -> NetworkConfig:
    """Convert file units to SI units and complete the power matrix at the first sweep point."""
    M = _as_int("M", scenario.M)
    K = _as_int("K", scenario.K)
    assert scenario.velocities_kmph is not None
    if len(scenario.velocities_kmph) != K:
        raise ConfigError("velocities_kmph", f"needs one velocity per user ({K}), got {len(scenario.velocities_kmph)}")
    velocities = [kmph_to_mps(_as_float("velocities_kmph", value)) for value in scenario.velocities_kmph]
    v = tuple(tuple(velocities[j] for j in range(K)) for _ in range(K))

    if len(scenario.mu11_db_range) != 2:
        raise ConfigError("mu11_db_range", "expected [start, stop]")
    start, stop = (_as_float("mu11_db_range", value) for value in scenario.mu11_db_range)

    if scenario.mu_offsets_db is not None:
        offsets = tuple(tuple(_as_float("mu_offsets_db", value) for value in row) for row in scenario.mu_offsets_db)
        _check_square("mu_offsets_db", offsets, K)
    else:
        offsets = cyclic_offsets(K, [_as_float("cross_offsets_db", value) for value in scenario.cross_offsets_db])

    newton = _newton_config(scenario.newton)

    cfg = NetworkConfig(
        M=M,
        K=K,
        mu=tuple(tuple(db_to_linear(start + offset) for offset in row) for row in offsets),
        v=v,
        fc=_as_float("fc_hz", scenario.fc_hz),
        c=_as_float("c_mps", scenario.c_mps),
        Ts=_as_float("Ts_ms", scenario.Ts_ms) / 1000.0,
        T=_as_int("T", scenario.T),
        Bs=_as_int("Bs", scenario.Bs),
        trials=_as_int("trials", scenario.trials),
        codebook_refresh=_as_int("codebook_refresh", scenario.codebook_refresh),
        seed=_as_int("seed", scenario.seed),
        mu11_db_range=(start, stop),
        mu_offsets_db=offsets,
        max_bits_per_link=_as_int("max_bits_per_link", scenario.max_bits_per_link),
        newton=newton,
    )
    logger.debug(f"Parsed scenario {cfg}")
    return cfg


def _as_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return int(value)


def _as_float(name: str, value: Any) -> float:
    """
    Accept numbers and numeric strings; YAML 1.1 loads exponents without a sign (`2e9`) as strings.
    """
    if isinstance(value, bool):
        raise ConfigError(name, f"expected a number, got {value!r}")
    try:
        number = float(value.strip()) if isinstance(value, str) else float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(name, f"expected a number, got {value!r}") from e
    if not math.isfinite(number):
        raise ConfigError(name, f"expected a finite number, got {value!r}")
    return number


def _check_square(name: str, matrix: Matrix, size: int):
    if len(matrix) != size or any(len(row) != size for row in matrix):
        raise ConfigError(name, f"expected a {size}x{size} matrix")


def _newton_config(value: Any) -> NewtonConfig:
    if value is None:
        return NewtonConfig()
    if isinstance(value, NewtonConfig):
        value = value.to_dict()  # type: ignore  # pylint: disable=no-member
    if not isinstance(value, dict):
        raise ConfigError("newton", "expected a mapping of solver settings")
    known = {f.name: f.type for f in fields(NewtonConfig)}
    if unknown := sorted(set(value) - set(known)):
        raise ConfigError(f"newton.{unknown[0]}", "unknown parameter")
    return NewtonConfig(
        **{
            name: (_as_int if known[name] in (int, "int") else _as_float)(f"newton.{name}", item)
            for name, item in value.items()
        }
    )
