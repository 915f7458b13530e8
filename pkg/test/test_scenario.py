import math

import pytest

from bitpart import default_scenario_text
from bitpart.allocation import NewtonConfig
from bitpart.scenario import DEFAULT_CARRIER_HZ, ConfigError, cyclic_offsets, db_to_linear, parse_config


def test_default_scenario(default_cfg):
    assert (default_cfg.M, default_cfg.K, default_cfg.T, default_cfg.Bs) == (3, 3, 30, 20)
    assert default_cfg.Ts == pytest.approx(0.005)
    assert default_cfg.fc == DEFAULT_CARRIER_HZ
    assert default_cfg.trials == 500
    assert default_cfg.v[0] == pytest.approx((10 / 3.6, 9 / 3.6, 8 / 3.6))
    assert default_cfg.v[2] == default_cfg.v[0]


def test_default_carrier_when_omitted(scenario_text):
    cfg = parse_config(scenario_text(fc_hz=None))
    assert cfg.fc == DEFAULT_CARRIER_HZ


def test_cyclic_powers(default_cfg):
    mu = default_cfg.mu
    assert mu[0][0] == pytest.approx(10.0)
    assert mu[0][1] == pytest.approx(10**0.8)
    assert mu[0][2] == pytest.approx(10**0.7)
    assert mu[1][2] == pytest.approx(10**0.8)
    assert mu[1][0] == pytest.approx(10**0.7)
    assert mu[2][0] == pytest.approx(10**0.8)
    assert mu[2][1] == pytest.approx(10**0.7)


def test_cyclic_offsets_size():
    with pytest.raises(ConfigError) as excinfo:
        cyclic_offsets(3, [-2.0])
    assert excinfo.value.field == "cross_offsets_db"


def test_explicit_offsets(scenario_text):
    offsets = [[0, -1, -4], [-5, 0, -6], [-7, -8, -9]]
    cfg = parse_config(scenario_text(mu_offsets_db=offsets))
    assert cfg.mu[0][2] == pytest.approx(db_to_linear(6))
    assert cfg.mu[2][2] == pytest.approx(db_to_linear(1))


def test_sweep(default_cfg):
    assert default_cfg.sweep_db == [float(db) for db in range(10, 20)]
    point = default_cfg.with_mu11_db(12.0)
    assert point.mu[0][0] == pytest.approx(10**1.2)
    assert point.mu[0][1] == pytest.approx(10**1.0)
    assert point.T == default_cfg.T


def test_overrides(scenario_text):
    cfg = parse_config(scenario_text(), seed=7, trials=3)
    assert (cfg.seed, cfg.trials) == (7, 3)
    assert parse_config(scenario_text(), seed=None).seed == 0


def test_newton_block(scenario_text):
    cfg = parse_config(scenario_text(newton={"max_iterations": 5, "gradient_tolerance": 1e-9}))
    assert isinstance(cfg.newton, NewtonConfig)
    assert cfg.newton.max_iterations == 5
    assert cfg.newton.gradient_tolerance == 1e-9
    assert cfg.newton.armijo == NewtonConfig().armijo


@pytest.mark.parametrize(
    ("changes", "field"),
    [
        ({"M": 4}, "M"),
        ({"Bs": None}, "Bs"),
        ({"velocities_kmph": None}, "velocities_kmph"),
        ({"velocities_kmph": [10, 9]}, "velocities_kmph"),
        ({"colour": "blue"}, "colour"),
        ({"seed": -1}, "seed"),
        ({"max_bits_per_link": 17}, "max_bits_per_link"),
        ({"Bs": 40}, "Bs"),
        ({"trials": 0}, "trials"),
        ({"Ts_ms": 0}, "Ts"),
        ({"mu11_db_range": [19, 10]}, "mu11_db_range"),
    ],
)
def test_invalid_scenario(scenario_text, changes, field):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(scenario_text(**changes))
    assert excinfo.value.field == field


@pytest.mark.parametrize("changes", [{"T": "thirty"}, {"M": True}, {"T": 2.5}])
def test_malformed_values(scenario_text, changes):
    with pytest.raises(ConfigError):
        parse_config(scenario_text(**changes))


@pytest.mark.parametrize("text", ["M: [3, 3", "- 1\n- 2\n"])
def test_not_a_scenario_document(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_error_is_value_error():
    with pytest.raises(ValueError, match="^Bs: missing"):
        parse_config(default_scenario_text().replace("Bs: 20", ""))


def test_db_to_linear():
    assert db_to_linear(0.0) == 1.0
    assert math.isclose(db_to_linear(-3.0), 0.5011872336272722)


def test_unsigned_exponents_are_numbers():
    cfg = parse_config(default_scenario_text().replace("fc_hz: 2.0e+9", "fc_hz: 2e9"))
    assert cfg.fc == 2e9
    text = default_scenario_text().replace("gradient_tolerance: 1.0e-6", "gradient_tolerance: 1e-9")
    assert parse_config(text).newton.gradient_tolerance == 1e-9


@pytest.mark.parametrize(
    ("text", "field"),
    [
        ("fc_hz: fast", "fc_hz"),
        ("fc_hz: .inf", "fc_hz"),
        ("fc_hz: true", "fc_hz"),
    ],
)
def test_non_numeric_carrier(text, field):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(default_scenario_text().replace("fc_hz: 2.0e+9", text))
    assert excinfo.value.field == field


@pytest.mark.parametrize(
    ("newton", "field"),
    [
        ({"max_iterations": 2.5}, "newton.max_iterations"),
        ({"armijo": "steep"}, "newton.armijo"),
        ({"damping": 0.5}, "newton.damping"),
        ([1.0e-6], "newton"),
    ],
)
def test_invalid_newton_block(scenario_text, newton, field):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(scenario_text(newton=newton))
    assert excinfo.value.field == field
