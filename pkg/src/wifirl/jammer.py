"""Non-carrier-sensing interferers with a burst schedule fixed before the run."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phy import rx_power_dbm


@dataclass(frozen=True)
class JammerConfig:
    x: float = 0.0
    y: float = 0.0
    tx_power: float = 10.0
    duty_cycle: float = 0.2
    burst_us: int = 500

    def __post_init__(self):
        if not 0.0 <= self.duty_cycle <= 1.0:
            raise ValueError(f"duty_cycle must be in [0, 1], got {self.duty_cycle}")
        if self.burst_us <= 0:
            raise ValueError("burst_us must be positive")

    @property
    def mean_gap_us(self) -> float:
        """Mean of the exponential off-time that yields the configured duty cycle."""
        if self.duty_cycle == 0.0:
            return math.inf
        return self.burst_us * (1.0 - self.duty_cycle) / self.duty_cycle


class JammerSchedule:
    """On-intervals ``[start, end)`` in microseconds, materialized up to a horizon."""

    def __init__(self, config: JammerConfig, horizon_us: int, rng: np.random.Generator):
        self.config = config
        self.horizon = int(horizon_us)
        c = config
        if c.duty_cycle == 0.0:
            starts = np.empty(0, dtype=np.int64)
            ends = np.empty(0, dtype=np.int64)
        elif c.duty_cycle == 1.0:
            starts = np.array([0], dtype=np.int64)
            ends = np.array([self.horizon + 1], dtype=np.int64)
        else:
            period = c.burst_us + c.mean_gap_us
            n = int(self.horizon / period * 1.5) + 16
            s, e = [], []
            t = 0
            while t < self.horizon:
                gaps = np.rint(rng.exponential(c.mean_gap_us, size=n)).astype(np.int64)
                for g in gaps:
                    t += int(g)
                    s.append(t)
                    t += c.burst_us
                    e.append(t)
                    if t >= self.horizon:
                        break
            starts = np.array(s, dtype=np.int64)
            ends = np.array(e, dtype=np.int64)
        self.starts = starts
        self.ends = ends

    def active(self, t: int) -> bool:
        i = np.searchsorted(self.ends, t, side="right")
        return bool(i < len(self.starts) and self.starts[i] <= t)

    def overlaps(self, a, b):
        """Vectorized: does any burst intersect ``[a, b)``?"""
        a = np.asarray(a)
        b = np.asarray(b)
        i = np.searchsorted(self.ends, a, side="right")
        ok = i < len(self.starts)
        out = np.zeros(np.broadcast(a, b).shape, dtype=bool)
        if len(self.starts):
            s = self.starts[np.minimum(i, len(self.starts) - 1)]
            out = ok & (s < b)
        return out

    def next_change(self, t: int) -> int | None:
        """Next time after ``t`` at which the on/off state flips, or None."""
        i = np.searchsorted(self.ends, t, side="right")
        if i >= len(self.starts):
            return None
        return int(self.ends[i]) if self.starts[i] <= t else int(self.starts[i])

    def on_time(self, a: int, b: int) -> int:
        """Total on-time inside ``[a, b)``."""
        if b <= a or not len(self.starts):
            return 0
        i = np.searchsorted(self.ends, a, side="right")
        j = np.searchsorted(self.starts, b, side="left")
        if j <= i:
            return 0
        s = np.maximum(self.starts[i:j], a)
        e = np.minimum(self.ends[i:j], b)
        return int(np.sum(np.maximum(e - s, 0)))

    def duty(self, a: int, b: int) -> float:
        return self.on_time(a, b) / (b - a)


class Jammers:
    """The set of jammers in a run and the power they deliver at a point."""

    def __init__(self, configs, horizon_us: int, rng: np.random.Generator, frequency: float = 5.2e9):
        self.configs = tuple(configs)
        self.frequency = frequency
        self.schedules = [JammerSchedule(c, horizon_us, rng) for c in self.configs]

    def __len__(self):
        return len(self.configs)

    def power_at(self, idx: int, x: float, y: float) -> float:
        c = self.configs[idx]
        return rx_power_dbm(c.tx_power, math.hypot(c.x - x, c.y - y), self.frequency)

    def interference_at(self, t: int, x: float, y: float) -> list[float]:
        return [self.power_at(k, x, y) for k, s in enumerate(self.schedules) if s.active(t)]

    def union_intervals(self, a: int, b: int, mask=None) -> list[tuple[int, int]]:
        """Merged on-intervals within ``[a, b)`` of the jammers selected by ``mask``."""
        iv = []
        for k, s in enumerate(self.schedules):
            if mask is not None and not mask[k]:
                continue
            i = np.searchsorted(s.ends, a, side="right")
            j = np.searchsorted(s.starts, b, side="left")
            iv.extend(zip(np.maximum(s.starts[i:j], a).tolist(), np.minimum(s.ends[i:j], b).tolist()))
        iv.sort()
        merged = []
        for lo, hi in iv:
            if hi <= lo:
                continue
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        return merged
