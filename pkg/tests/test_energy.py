import math

import pytest
from hypothesis import given, strategies as st

from wifirl.energy import (BUSY, IDLE, RX, SLEEP, TX, Battery, EnergyMeter, RadioEnergyParams,
                           battery_bucket)


def tx_current_oracle(dbm, v=3.0, eta=0.1, base=0.273):
    return 10 ** ((dbm - 30) / 10) / (v * eta) + base


@pytest.mark.parametrize("dbm, amps", [(10, 0.3063), (1, 0.2772)])
def test_tx_current_examples(dbm, amps):
    got = RadioEnergyParams().tx_current(dbm)
    assert got == pytest.approx(tx_current_oracle(dbm), abs=1e-15)
    assert got == pytest.approx(amps, abs=5e-5)


def test_tx_current_increasing_and_range_checked():
    p = RadioEnergyParams()
    assert all(p.tx_current(k + 1) > p.tx_current(k) for k in range(1, 10))
    for bad in (0, 11, -3):
        with pytest.raises(ValueError):
            p.tx_current(bad)


def test_param_invariants():
    with pytest.raises(ValueError):
        RadioEnergyParams(sleep_a=0.3)
    with pytest.raises(ValueError):
        RadioEnergyParams(idle_a=-1)


def test_accrue_examples():
    m = EnergyMeter(RadioEnergyParams(), Battery(5.0))
    assert m.accrue(IDLE, 5000) == pytest.approx(0.273 * 3.0 * 0.005, abs=1e-15)
    assert m.accrue(IDLE, 5000) == pytest.approx(4.095e-3, abs=1e-12)
    assert m.accrue(IDLE, 0) == 0.0
    assert m.accrue(TX, 1000, 10) == pytest.approx(tx_current_oracle(10) * 3.0 * 1e-3, abs=1e-15)
    assert m.accrue(TX, 1000, 10) == pytest.approx(0.919e-3, abs=1e-6)


def test_state_currents():
    p = RadioEnergyParams()
    assert [p.current(s) for s in (IDLE, BUSY, RX, SLEEP)] == [0.273, 0.273, 0.313, 0.033]
    with pytest.raises(ValueError):
        p.current("off")


@pytest.mark.parametrize("frac, bucket", [(1.0, 100), (0.55, 60), (0.04, 10), (0.0, 10), (0.5, 50), (0.91, 100)])
def test_battery_bucket(frac, bucket):
    assert battery_bucket(frac * 5.0, 5.0) == bucket
    assert Battery(5.0, frac if frac > 0 else 1.0).level_bucket() == (bucket if frac > 0 else 100)


def test_battery_floors_at_zero():
    b = Battery(1e-3)
    m = EnergyMeter(RadioEnergyParams(), b)
    taken = m.accrue(IDLE, 10_000)
    assert b.remaining == 0.0 and b.depleted
    assert taken == pytest.approx(1e-3)
    assert m.accrue(IDLE, 1000) == 0.0


@given(st.lists(st.tuples(st.sampled_from([IDLE, BUSY, RX, SLEEP, TX]), st.integers(0, 50_000),
                          st.integers(1, 10)), max_size=80),
       st.floats(0.001, 2.0))
def test_energy_conservation_and_monotone_battery(ops, cap):
    b = Battery(cap)
    m = EnergyMeter(RadioEnergyParams(), b)
    total = 0.0
    prev, prev_bucket = b.remaining, b.level_bucket()
    for state, dur, pw in ops:
        total += m.accrue(state, dur, pw if state == TX else None)
        assert 0.0 <= b.remaining <= prev
        assert b.level_bucket() <= prev_bucket
        prev, prev_bucket = b.remaining, b.level_bucket()
    assert abs(total - (b.capacity - b.remaining)) <= 1e-12
    assert math.isclose(m.total, total, abs_tol=1e-15)
