import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wifirl import phy


def friis_oracle(tx_dbm, d, f):
    wavelength = 299_792_458.0 / f
    gain = (wavelength / (4 * math.pi * d)) ** 2
    return tx_dbm + 10 * math.log10(gain)


def test_mcs_table_endpoints_and_interior():
    rates = [m.phy_rate for m in phy.MCS_TABLE]
    assert rates == [58.5, 117.0, 175.5, 234.0, 351.0, 468.0, 526.5, 585.0, 702.0, 780.0]
    assert all(b > a for a, b in zip(rates, rates[1:]))
    thr = [m.min_sinr for m in phy.MCS_TABLE]
    assert all(b > a for a, b in zip(thr, thr[1:]))


def test_mcs_table_matches_subcarrier_arithmetic():
    bits = [1, 2, 2, 4, 4, 6, 6, 6, 8, 8]
    coding = [1 / 2, 1 / 2, 3 / 4, 1 / 2, 3 / 4, 2 / 3, 3 / 4, 5 / 6, 3 / 4, 5 / 6]
    for m, b, c in zip(phy.MCS_TABLE, bits, coding):
        assert m.phy_rate == pytest.approx(468 * b * c / 4.0, abs=1e-9)


def test_thresholds_must_increase():
    with pytest.raises(ValueError):
        phy.build_mcs_table((5, 8, 8, 14, 18, 22, 24, 26, 30, 32))


def test_noise_floor_160mhz():
    assert phy.noise_floor_dbm(160e6, 7.0) == pytest.approx(-84.9588, abs=1e-4)
    assert phy.ChannelParams().noise_floor_dbm == pytest.approx(-84.9588, abs=1e-4)


@pytest.mark.parametrize("d, expected", [(10.0, -56.77), (20.0, -62.79)])
def test_rx_power_friis(d, expected):
    got = phy.rx_power_dbm(10.0, d, 5.2e9)
    assert got == pytest.approx(friis_oracle(10.0, d, 5.2e9), abs=1e-9)
    assert got == pytest.approx(expected, abs=0.01)


def test_rx_power_distance_doubling_and_linearity():
    a = phy.rx_power_dbm(10.0, 10.0)
    assert a - phy.rx_power_dbm(10.0, 20.0) == pytest.approx(20 * math.log10(2), abs=1e-12)
    assert phy.rx_power_dbm(13.0, 7.0) - phy.rx_power_dbm(10.0, 7.0) == pytest.approx(3.0, abs=1e-12)


def test_rx_power_clamps_small_distance():
    assert phy.rx_power_dbm(10.0, 0.0) == phy.rx_power_dbm(10.0, 0.1)


@given(st.floats(0.2, 500.0), st.floats(0.01, 10.0))
def test_rx_power_strictly_decreasing(d, extra):
    assert phy.rx_power_dbm(5.0, d + extra) < phy.rx_power_dbm(5.0, d)


def test_fading_draw_scales_power():
    assert phy.rx_power_dbm(10.0, 10.0, fading_draw=0.5) == pytest.approx(
        phy.rx_power_dbm(10.0, 10.0) - 10 * math.log10(2), abs=1e-12)


def test_nakagami_unit_mean():
    rng = np.random.default_rng(11)
    draws = phy.nakagami_power(rng, 1.5, size=100_000)
    assert abs(draws.mean() - 1.0) < 0.02


def test_sinr_examples():
    noise = -174 + 10 * math.log10(160e6) + 7
    assert phy.sinr_db(-50.0, [], noise) == pytest.approx(-50.0 - noise, abs=1e-9)
    assert phy.sinr_db(-50.0, [], -84.96) == pytest.approx(34.96, abs=1e-9)
    assert phy.sinr_db(-50.0, [-50.0], -200.0) == pytest.approx(0.0, abs=1e-6)
    # two interferers 3 dB down add up (in mW) to roughly the signal power
    two = 10 * math.log10(2 * 10 ** (-5.3))
    expected = -50.0 - two
    assert phy.sinr_db(-50.0, [-53.0, -53.0], -200.0) == pytest.approx(expected, abs=1e-6)
    assert abs(expected) < 0.02


def per_oracle(sinr, threshold, bits, width=1.5):
    offset = math.log(phy.REFERENCE_MPDU_BITS / math.log(2))
    ber = 1.0 / (1.0 + math.exp((sinr - threshold) / width + offset))
    ok = 1.0
    for _ in range(bits):
        ok *= 1.0 - ber
    return 1.0 - ok


@pytest.mark.parametrize("mcs", range(10))
def test_per_far_from_threshold(mcs):
    bits = phy.REFERENCE_MPDU_BITS
    thr = phy.MCS_TABLE[mcs].min_sinr
    assert phy.per(thr + 20, mcs, bits) < 1e-3
    assert phy.per(thr - 20, mcs, bits) > 0.999


@pytest.mark.parametrize("delta", [-3.0, -1.0, 0.0, 0.7, 2.0, 5.0])
def test_per_matches_bitwise_product(delta):
    thr = phy.MCS_TABLE[4].min_sinr
    assert phy.per(thr + delta, 4, 2000) == pytest.approx(per_oracle(thr + delta, thr, 2000), rel=1e-9, abs=1e-12)


def test_per_half_at_threshold_for_reference_mpdu():
    thr = phy.MCS_TABLE[6].min_sinr
    assert phy.per(thr, 6, phy.REFERENCE_MPDU_BITS) == pytest.approx(0.5, abs=1e-3)


def test_per_monotone_on_grid():
    sinrs = np.linspace(-10, 60, 141)
    bits = [100, 1000, 12096, 100_000]
    table = np.array([[phy.per(sinrs, m, b) for b in bits] for m in range(10)])
    assert np.all((table >= 0) & (table <= 1))
    assert np.all(np.diff(table, axis=2) <= 1e-15)  # non-increasing in SINR
    assert np.all(np.diff(table, axis=0) >= -1e-15)  # non-decreasing in MCS
    assert np.all(np.diff(table, axis=1) >= -1e-15)  # non-decreasing in length


@settings(max_examples=200)
@given(st.floats(-30, 80))
def test_per_highest_mcs_never_better(s):
    assert phy.per(s, 9, 12096) >= phy.per(s, 0, 12096)


def test_per_rejects_bad_inputs():
    with pytest.raises(ValueError):
        phy.per(10.0, 10, 100)
    with pytest.raises(ValueError):
        phy.per(10.0, 3, 0)


def test_airtime_examples():
    one = phy.airtime_us(phy.FrameSpec(mcs=9, tx_power=10, n_aggregated=1))
    assert one - phy.PREAMBLE_US == math.ceil(1512 * 8 / 780)  # 15.5 us -> 16
    full = phy.airtime_us(phy.FrameSpec(mcs=9, tx_power=10, n_aggregated=64))
    assert full - phy.PREAMBLE_US == math.ceil(64 * 1512 * 8 / 780)  # ~992.5 us
    slow = phy.airtime_us(phy.FrameSpec(mcs=0, tx_power=10, n_aggregated=64))
    ratio = (slow - phy.PREAMBLE_US) / (full - phy.PREAMBLE_US)
    assert ratio == pytest.approx(780 / 58.5, rel=1e-3)


def test_airtime_exact_division():
    # 13 MPDUs * 12096 bits at 234 Mbps is exactly 672 us; no spurious round-up
    assert phy.airtime_us(phy.FrameSpec(3, 10, 13), preamble_us=0) == 672


def test_frame_spec_validation():
    with pytest.raises(ValueError):
        phy.FrameSpec(mcs=3, tx_power=5, n_aggregated=65)
    with pytest.raises(ValueError):
        phy.FrameSpec(mcs=10, tx_power=5)
