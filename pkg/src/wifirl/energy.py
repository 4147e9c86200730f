"""Transmitter radio energy: per-state current draw and a battery that only drains."""
from __future__ import annotations

import math
from dataclasses import dataclass

IDLE, BUSY, TX, RX, SLEEP = "idle", "busy", "tx", "rx", "sleep"

MIN_TX_DBM, MAX_TX_DBM = 1, 10


@dataclass(frozen=True)
class RadioEnergyParams:
    voltage: float = 3.0
    idle_a: float = 0.273
    busy_a: float = 0.273
    rx_a: float = 0.313
    sleep_a: float = 0.033
    tx_eta: float = 0.1
    tx_base_a: float = 0.273

    def __post_init__(self):
        currents = (self.idle_a, self.busy_a, self.rx_a, self.sleep_a, self.tx_base_a)
        if min(currents) <= 0 or self.voltage <= 0 or not 0 < self.tx_eta <= 1:
            raise ValueError("currents, voltage and eta must be positive")
        if not self.sleep_a < self.idle_a < self.rx_a:
            raise ValueError("expected sleep_a < idle_a < rx_a")

    def tx_current(self, power_dbm: float) -> float:
        """Linear TX current model: radiated watts over (V * eta) on top of a base draw."""
        if not MIN_TX_DBM <= power_dbm <= MAX_TX_DBM:
            raise ValueError(f"tx power {power_dbm} dBm outside [{MIN_TX_DBM}, {MAX_TX_DBM}]")
        watts = 10.0 ** ((power_dbm - 30.0) / 10.0)
        return watts / (self.voltage * self.tx_eta) + self.tx_base_a

    def current(self, state: str, power_dbm: float | None = None) -> float:
        if state == TX:
            return self.tx_current(power_dbm)
        try:
            return {IDLE: self.idle_a, BUSY: self.busy_a, RX: self.rx_a, SLEEP: self.sleep_a}[state]
        except KeyError:
            raise ValueError(f"unknown radio state {state!r}") from None


class Battery:
    def __init__(self, capacity: float, initial_fraction: float = 1.0):
        if capacity <= 0:
            raise ValueError("battery capacity must be positive")
        if not 0 < initial_fraction <= 1:
            raise ValueError("initial_fraction must be in (0, 1]")
        self.capacity = float(capacity)
        self.remaining = self.capacity * initial_fraction
        self.initial = self.remaining
        self.drawn = 0.0  # energy actually removed, <= requested when the floor is hit

    @property
    def fraction(self) -> float:
        return self.remaining / self.capacity

    @property
    def depleted(self) -> bool:
        return self.remaining <= 0.0

    def draw(self, joules: float) -> float:
        take = min(joules, self.remaining)
        self.remaining -= take
        if self.remaining < 1e-15:
            self.remaining = 0.0
        self.drawn += take
        return take

    def level_bucket(self) -> int:
        return battery_bucket(self.remaining, self.capacity)


def battery_bucket(remaining: float, capacity: float) -> int:
    """Battery percentage rounded up to a multiple of 10, clamped to [10, 100]."""
    tenths = math.ceil(round(remaining / capacity * 10, 9))
    return min(max(tenths * 10, 10), 100)


class EnergyMeter:
    """Charges a battery for each radio-state interval.

    ``accrue`` returns the energy actually removed from the battery, which is
    less than I*V*t only once the battery floors at zero.
    """

    def __init__(self, params: RadioEnergyParams, battery: Battery):
        self.params = params
        self.battery = battery
        self.total = 0.0
        self.by_state = {IDLE: 0.0, BUSY: 0.0, TX: 0.0, RX: 0.0, SLEEP: 0.0}
        self.time_by_state = dict.fromkeys(self.by_state, 0)

    def accrue(self, state: str, duration_us: int, power_dbm: float | None = None) -> float:
        if duration_us < 0:
            raise ValueError("negative duration")
        joules = self.params.current(state, power_dbm) * self.params.voltage * duration_us * 1e-6
        taken = self.battery.draw(joules)
        self.total += taken
        self.by_state[state] += taken
        self.time_by_state[state] += duration_us
        return taken
