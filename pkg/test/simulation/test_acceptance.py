"""Full power sweep of the packaged scenario; several minutes, deselected unless `-m slow` is given."""
import math

import pytest

from bitpart import default_scenario_text
from bitpart.scenario import parse_config
from bitpart.schemes import LIMITED_FEEDBACK_SCHEMES, SchemeId
from bitpart.simulation import SweepRow, run_sweep


@pytest.fixture(name="sweep", scope="module")
def fixture_sweep() -> dict[tuple[float, SchemeId], SweepRow]:
    rows = run_sweep(parse_config(default_scenario_text()), list(SchemeId))
    return {(row.mu11_db, row.scheme): row for row in rows}


def _margin(first: SweepRow, second: SweepRow) -> float:
    return 2 * math.hypot(first.std_err, second.std_err)


@pytest.mark.slow
def test_perfect_csi_dominates(sweep):
    for db in range(10, 20):
        perfect = sweep[(float(db), SchemeId.PERFECT_CSI)]
        for scheme in LIMITED_FEEDBACK_SCHEMES:
            limited = sweep[(float(db), scheme)]
            assert perfect.mean_rate >= limited.mean_rate - _margin(perfect, limited)


@pytest.mark.slow
def test_perfect_csi_increases_with_power(sweep):
    rates = [sweep[(float(db), SchemeId.PERFECT_CSI)].mean_rate for db in range(10, 20)]
    assert all(later > earlier for earlier, later in zip(rates, rates[1:]))


@pytest.mark.slow
def test_adaptive_bits_are_not_worse_than_equal_bits(sweep):
    adaptive = sweep[(19.0, SchemeId.MFP_ADAPTIVE)]
    equal = sweep[(19.0, SchemeId.MFP_EQUAL)]
    assert adaptive.mean_rate >= equal.mean_rate - _margin(adaptive, equal)


@pytest.mark.slow
def test_feedback_every_subframe_beats_adaptive_periods(sweep):
    adaptive = sweep[(19.0, SchemeId.MFP_ADAPTIVE)]
    afp = sweep[(19.0, SchemeId.AFP)]
    assert adaptive.mean_rate > afp.mean_rate + _margin(adaptive, afp)


@pytest.mark.slow
def test_gap_grows_with_power(sweep):
    def gap(db: float) -> float:
        return sweep[(db, SchemeId.MFP_ADAPTIVE)].mean_rate - sweep[(db, SchemeId.AFP)].mean_rate

    assert gap(19.0) > gap(10.0)
