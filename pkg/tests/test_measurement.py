import numpy as np
import pytest

from fchosim.blockage import MpueAntenna, PANEL_BORESIGHT_DEG
from fchosim.config import ConfigError
from fchosim.measurement import (L3Filter, RlmWindow, cell_quality, l3_filter, raw_rsrp,
                                 rlm_average, sinr_db)


def test_raw_rsrp_budget():
    assert raw_rsrp(40.0, path_loss_db=100.0) == -60.0
    assert raw_rsrp(40.0, path_loss_db=100.0) == raw_rsrp(40.0, path_loss_db=100.0)


def test_case_iv_rsrp_18_66_lower_at_p1_boresight():
    az = PANEL_BORESIGHT_DEG[0]
    g2 = MpueAntenna("II").panel_rx_gain_db(0, az, 90.0)
    g4 = MpueAntenna("IV").panel_rx_gain_db(0, az, 90.0)
    assert raw_rsrp(40, panel_gain_db=g2, path_loss_db=100) - raw_rsrp(
        40, panel_gain_db=g4, path_loss_db=100) == pytest.approx(18.66)


def test_l3_filter_examples():
    assert l3_filter(-80.0, -70.0, 1.0) == -70.0
    assert l3_filter(-80.0, -70.0, 0.5) == -75.0
    assert l3_filter(None, -70.0, 0.5) == -70.0
    with pytest.raises(ConfigError):
        l3_filter(-80.0, -70.0, 0.0)


def test_l3_converges_within_20_steps():
    f = L3Filter((1,), 0.5)
    f.update(np.array([-100.0]))
    for _ in range(20):
        v = f.update(np.array([-70.0]))
    assert abs(v[0] + 70.0) < 0.01


def test_cell_quality_max_over_beams_and_panels():
    assert cell_quality(np.array([[-80.0]])) == -80.0
    assert cell_quality(np.array([[-80.0, -80.0], [-75.0, -75.0]])) == -75.0
    assert cell_quality(np.array([[-90.0, -74.0, -81.0]])) == -74.0


def test_sinr_definitions():
    assert sinr_db(-85.0, np.empty((0, 12)), -85.0) == pytest.approx(0.0)
    inter = np.full((3, 12), -70.0)
    a = sinr_db(-60.0, inter, -200.0)
    b = sinr_db(-60.0, inter + 10 * np.log10(2), -200.0)
    assert a - b == pytest.approx(10 * np.log10(2))


def test_expectation_matches_sampled_mean():
    rng = np.random.default_rng(0)
    inter = rng.uniform(-90, -70, size=(6, 12))
    exp = sinr_db(-60.0, inter, -200.0, mode="expectation")
    lin = [10 ** (sinr_db(-60.0, inter, -200.0, mode="sampled", rng=rng) / -10)
           for _ in range(10_000)]
    # expectation mode uses the mean interference, i.e. the mean of 1/SINR
    assert 10 * np.log10(1 / np.mean(lin)) == pytest.approx(exp, abs=0.1)


def test_rlm_average():
    assert rlm_average([-3.0] * 10, 5) == pytest.approx(-3.0)
    assert rlm_average([-20.0, -3.0], 1) == pytest.approx(-3.0)
    trace = [-200.0] * 20 + [0.0] * 20
    vals = [rlm_average(trace[:k], 20) for k in range(21, 41)]
    assert np.all(np.diff(vals) > 0)


def test_rlm_window_ring_buffer():
    w = RlmWindow(2, 3)
    for v in (1.0, 2.0, 3.0, 4.0):
        w.push(np.array([v, v]), np.array([True, False]))
    assert w.value_db()[0] == pytest.approx(10 * np.log10(3.0))
    w.reset(0)
    assert w.count[0] == 0
