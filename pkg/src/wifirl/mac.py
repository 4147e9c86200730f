"""CSMA/CA MAC pieces: FIFO packet buffer, contention window ladder, backoff draws."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

CW_LADDER = (15, 31, 63, 127, 255, 511, 1023)
CW_MIN, CW_MAX = CW_LADDER[0], CW_LADDER[-1]

SLOT_US = 9
SIFS_US = 16
DIFS_US = SIFS_US + 2 * SLOT_US  # 34
BLOCK_ACK_US = 32
MAX_AMPDU = 64
RETRY_LIMIT = 7


def backoff_draw(cw: int, rng: np.random.Generator) -> int:
    """Uniform integer slot count in ``[0, cw]``."""
    if cw not in CW_LADDER:
        raise ValueError(f"cw {cw} not in {CW_LADDER}")
    return int(rng.integers(0, cw + 1))


class ContentionState:
    def __init__(self):
        self.cw_index = 0
        self.retry_count = 0

    @property
    def cw(self) -> int:
        return CW_LADDER[self.cw_index]

    def on_failure(self) -> int:
        self.cw_index = min(self.cw_index + 1, len(CW_LADDER) - 1)
        self.retry_count += 1
        return self.cw

    def on_success(self) -> int:
        self.cw_index = 0
        self.retry_count = 0
        return self.cw


class ArrivalProcess:
    """Evenly spaced arrivals: packet k (k >= 1) arrives at ceil(k * 1e6 / rate) us."""

    def __init__(self, rate: float, start_us: int = 0):
        if rate < 0:
            raise ValueError("arrival rate must be >= 0")
        self.rate = float(rate)
        self.start = int(start_us)
        self.emitted = 0

    def count_by(self, t: int) -> int:
        if self.rate == 0:
            return 0
        return math.floor((t - self.start) * self.rate / 1e6 + 1e-9)

    def time_of(self, k: int) -> int:
        return self.start + math.ceil(k * 1e6 / self.rate - 1e-9)

    def take_until(self, t: int) -> list[int]:
        """Arrival times of every not-yet-emitted packet arriving at or before ``t``."""
        n = self.count_by(t)
        out = [self.time_of(k) for k in range(self.emitted + 1, n + 1)]
        self.emitted = max(n, self.emitted)
        return out

    def next_time(self) -> int | None:
        if self.rate == 0:
            return None
        return self.time_of(self.emitted + 1)


@dataclass
class DropCounts:
    overflow: int = 0
    delay: int = 0
    retry: int = 0

    @property
    def total(self) -> int:
        return self.overflow + self.delay + self.retry


class PacketQueue:
    """FIFO buffer of ``(arrival_us, retries)`` entries.

    Entries handed to the PHY are *in flight*: they still occupy buffer space
    until acknowledged or dropped, and failures go back to the head.
    """

    def __init__(self, capacity: int = 5000, max_delay_us: int = 1_000_000):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.max_delay_us = int(max_delay_us)
        self._q: deque = deque()
        self.in_flight = 0
        self.arrivals = 0
        self.delivered = 0
        self.drops = DropCounts()

    def __len__(self):
        return len(self._q)

    @property
    def occupancy(self) -> int:
        return len(self._q) + self.in_flight

    def push_arrivals(self, times) -> int:
        dropped = 0
        for t in times:
            self.arrivals += 1
            if self.occupancy >= self.capacity:
                dropped += 1
            else:
                self._q.append((t, 0))
        self.drops.overflow += dropped
        return dropped

    def enqueue_arrivals(self, rate: float, window_us: int, start_us: int = 0) -> int:
        """Append evenly spaced arrivals for one window; returns overflow drops."""
        return self.push_arrivals(ArrivalProcess(rate, start_us).take_until(start_us + window_us))

    def evict_stale(self, now: int) -> int:
        n = 0
        q = self._q
        while q and now - q[0][0] > self.max_delay_us:
            q.popleft()
            n += 1
        self.drops.delay += n
        return n

    def take(self, n: int) -> list:
        batch = [self._q.popleft() for _ in range(min(n, len(self._q)))]
        self.in_flight += len(batch)
        return batch

    def settle(self, batch, acked, retry_limit: int = RETRY_LIMIT) -> tuple[int, int]:
        """Resolve an in-flight batch; returns (delivered, retry drops)."""
        self.in_flight -= len(batch)
        retry = [(t, r + 1) for (t, r), ok in zip(batch, acked) if not ok]
        kept = [e for e in retry if e[1] <= retry_limit]
        self._q.extendleft(reversed(kept))
        delivered = len(batch) - len(retry)
        dropped = len(retry) - len(kept)
        self.delivered += delivered
        self.drops.retry += dropped
        return delivered, dropped

    def head_arrivals(self):
        return [t for t, _ in self._q]
