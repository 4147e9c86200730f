"""One 802.11ac link (Tx -> Rx) with up to two jammers, advanced in 5 ms epochs."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np

from . import phy
from .energy import BUSY, IDLE, RX, TX, Battery, EnergyMeter, RadioEnergyParams
from .engine import EPOCH_US, EventQueue, NodeRegistry, RandomWalk, rng_stream
from .jammer import JammerConfig, Jammers
from .mac import (
    BLOCK_ACK_US, CW_LADDER, DIFS_US, MAX_AMPDU, RETRY_LIMIT, SIFS_US, SLOT_US,
    ArrivalProcess, ContentionState, PacketQueue, backoff_draw,
)

JAMMER_OFFSET_M = 10.0


@dataclass(frozen=True)
class LinkConfig:
    distance: float = 10.0
    n_jammers: int = 1
    jammer: JammerConfig = field(default_factory=JammerConfig)
    arrival_rate: float = 60_000.0
    sim_time_us: int = 10_000_000
    queue_capacity: int = 5000
    max_delay_us: int = 1_000_000
    payload: int = 1472
    channel: phy.ChannelParams = field(default_factory=phy.ChannelParams)
    energy: RadioEnergyParams = field(default_factory=RadioEnergyParams)
    battery_j: float = 5.0
    battery_initial_fraction: float = 1.0
    max_ampdu: int = MAX_AMPDU
    retry_limit: int = RETRY_LIMIT
    preamble_us: int = phy.PREAMBLE_US
    rx_mobility: RandomWalk | None = None

    def __post_init__(self):
        if self.n_jammers not in (0, 1, 2):
            raise ValueError("n_jammers must be 0, 1 or 2")
        if self.distance < 0:
            raise ValueError("distance must be >= 0")
        if not 1 <= self.max_ampdu <= 64:
            raise ValueError("max_ampdu must be in [1, 64]")

    def jammer_configs(self) -> list[JammerConfig]:
        # jammers sit JAMMER_OFFSET_M from the receiver, on either side of the link axis
        sides = (JAMMER_OFFSET_M, -JAMMER_OFFSET_M)[: self.n_jammers]
        return [replace(self.jammer, x=self.distance, y=dy) for dy in sides]


@dataclass
class EpochOutcome:
    t_start: int
    t_end: int
    arrivals: int = 0
    delivered: int = 0
    dropped_overflow: int = 0
    dropped_delay: int = 0
    dropped_retry: int = 0
    energy_j: float = 0.0
    queue_len: int = 0
    last_ack: int = 0
    cw: int = CW_LADDER[0]
    last_backoff: int = 0
    frames: int = 0
    mpdus_sent: int = 0
    battery_fraction: float = 1.0
    depleted: bool = False

    @property
    def dropped(self) -> int:
        return self.dropped_overflow + self.dropped_delay + self.dropped_retry


class RateController(Protocol):
    """Per-frame rate selection hook (e.g. Minstrel). Returns ``(power_dbm, mcs)``."""

    def choose(self, now: int) -> tuple[int, int]: ...

    def report(self, now: int, mcs: int, sent: int, acked: int) -> None: ...


@dataclass
class _Segment:
    start: int
    end: int
    state: str
    power: float | None = None


class LinkSimulation:
    """Transmitter-side simulation of a saturated-or-not 802.11ac link.

    Call :meth:`run_epoch` repeatedly; each call advances exactly 5000 us.
    The transmit action is either fixed per epoch (``action`` argument) or
    chosen per frame by an attached :class:`RateController`.
    """

    def __init__(self, config: LinkConfig, seed: int = 0, controller: RateController | None = None):
        self.config = config
        self.seed = seed
        self.controller = controller
        self.events = EventQueue()
        self.rng_channel = rng_stream(seed, "channel")
        self.rng_backoff = rng_stream(seed, "backoff")
        self.nodes = NodeRegistry(rng_stream(seed, "mobility"))
        self.nodes.add("tx", 0.0, 0.0)
        d = config.distance
        walk = config.rx_mobility
        if walk is not None and walk.bounds == RandomWalk().bounds:
            walk = replace(walk, bounds=(d - 25.0, -25.0, d + 25.0, 25.0))
        self.nodes.add("rx", d, 0.0, walk)
        horizon = config.sim_time_us + EPOCH_US
        self.jammers = Jammers(config.jammer_configs(), horizon, rng_stream(seed, "jammer"),
                               config.channel.frequency)
        for k, jc in enumerate(self.jammers.configs):
            self.nodes.add(f"jammer{k}", jc.x, jc.y)
        ch = config.channel
        self.noise_floor = ch.noise_floor_dbm
        self.mcs_table = phy.build_mcs_table(ch.min_sinr)
        # which jammers the transmitter can hear above its CCA threshold
        self.sensed = [self.jammers.power_at(k, 0.0, 0.0) >= ch.cca_threshold
                       for k in range(len(self.jammers))]
        self.queue = PacketQueue(config.queue_capacity, config.max_delay_us)
        self.traffic = ArrivalProcess(config.arrival_rate)
        self.contention = ContentionState()
        self.battery = Battery(config.battery_j, config.battery_initial_fraction)
        self.meter = EnergyMeter(config.energy, self.battery)
        self.mpdu_bits = phy.mpdu_bits(config.payload)

        self.action = (10, 0)
        self.backoff = 0
        self.last_backoff = 0
        self.last_ack = 0
        self._segments: deque[_Segment] = deque()
        self._charged_until = 0
        self._epoch = EpochOutcome(0, EPOCH_US)
        self._stopped = False
        self.totals = EpochOutcome(0, 0)
        self.trace: list[tuple] = []
        self.events.schedule(0, self._try_access)

    # ------------------------------------------------------------------ public
    @property
    def now(self) -> int:
        return self.events.now

    def distance(self, a: str, b: str) -> float:
        return self.nodes.distance(a, b)

    def schedule(self, time: int, callback) -> None:
        self.events.schedule(time, callback)

    def run_epoch(self, action: tuple[int, int] | None = None) -> EpochOutcome:
        if action is not None:
            power, mcs = action
            if not 0 <= mcs < phy.N_MCS:
                raise ValueError(f"mcs out of range: {mcs}")
            self.action = (power, mcs)
        t0 = self.now
        t1 = t0 + EPOCH_US
        self._epoch = ep = EpochOutcome(t0, t1)
        self.nodes.advance(t0)
        self.events.run_until(t1)
        self._admit(t1)
        self._charge_until(t1)
        ep.queue_len = self.queue.occupancy
        ep.last_ack = self.last_ack
        ep.cw = self.contention.cw
        ep.last_backoff = self.last_backoff
        ep.battery_fraction = self.battery.fraction
        ep.depleted = self.battery.depleted
        self._accumulate(ep)
        return ep

    def check_conservation(self) -> None:
        q = self.queue
        lhs = q.arrivals
        rhs = q.delivered + q.drops.total + q.occupancy
        if lhs != rhs:
            raise AssertionError(f"packet conservation violated: {lhs} != {rhs}")
        # receptions are credited as MPDUs arrive, before the block ack settles them
        got = self.totals.delivered
        if not q.delivered <= got <= q.delivered + q.in_flight:
            raise AssertionError(f"receptions {got} inconsistent with queue deliveries {q.delivered}")
        drained = self.battery.initial - self.battery.remaining
        if abs(self.meter.total - drained) > 1e-12:
            raise AssertionError(f"energy conservation violated: {self.meter.total} != {drained}")

    # ---------------------------------------------------------------- internals
    def _accumulate(self, ep: EpochOutcome) -> None:
        t = self.totals
        t.t_end = ep.t_end
        for name in ("arrivals", "delivered", "dropped_overflow", "dropped_delay",
                     "dropped_retry", "frames", "mpdus_sent"):
            setattr(t, name, getattr(t, name) + getattr(ep, name))
        t.energy_j += ep.energy_j
        self.trace.append((ep.t_start, ep.delivered, ep.dropped, ep.queue_len, ep.cw,
                           ep.last_backoff, ep.last_ack, round(ep.energy_j, 15)))

    def _admit(self, t: int) -> None:
        times = self.traffic.take_until(t)
        if times:
            self._epoch.arrivals += len(times)
            self._epoch.dropped_overflow += self.queue.push_arrivals(times)
        self._epoch.dropped_delay += self.queue.evict_stale(t)

    def _charge_until(self, t: int) -> None:
        a = self._charged_until
        segs = self._segments
        spent = 0.0
        while a < t:
            if segs and segs[0].start <= a:
                seg = segs[0]
                b = min(seg.end, t)
                spent += self.meter.accrue(seg.state, b - a, seg.power)
                if b == seg.end:
                    segs.popleft()
            else:
                b = min(segs[0].start, t) if segs else t
                busy = sum(hi - lo for lo, hi in self.jammers.union_intervals(a, b, self.sensed))
                if busy:
                    spent += self.meter.accrue(BUSY, busy)
                spent += self.meter.accrue(IDLE, b - a - busy)
            a = b
        self._charged_until = max(self._charged_until, t)
        self._epoch.energy_j += spent

    def _busy_period(self, t: int):
        """Merged sensed-busy interval containing ``t`` or starting next after it."""
        span = None
        for k, s in enumerate(self.jammers.schedules):
            if not self.sensed[k]:
                continue
            i = int(np.searchsorted(s.ends, t, side="right"))
            if i < len(s.starts):
                cand = (int(s.starts[i]), int(s.ends[i]))
                if span is None or cand[0] < span[0]:
                    span = cand
        if span is None:
            return None
        lo, hi = span
        grew = True
        while grew:
            grew = False
            for k, s in enumerate(self.jammers.schedules):
                if not self.sensed[k]:
                    continue
                i = int(np.searchsorted(s.ends, hi, side="right"))
                # a burst of this jammer that started at or before hi and ends after it
                if i < len(s.starts) and s.starts[i] <= hi:
                    hi = int(s.ends[i])
                    grew = True
        return max(lo, t), hi

    def _access_time(self, t: int, slots: int) -> int:
        """When a backoff of ``slots`` started at ``t`` expires, freezing while busy."""
        while True:
            span = self._busy_period(t)
            if span is not None and span[0] <= t:
                t = span[1]
                span = self._busy_period(t)
            need = DIFS_US + slots * SLOT_US
            if span is None or t + need <= span[0]:
                return t + need
            idle = span[0] - t - DIFS_US
            if idle > 0:
                slots -= min(slots, idle // SLOT_US)
            t = span[1]

    def _try_access(self) -> None:
        if self._stopped:
            return
        now = self.now
        self._admit(now)
        if self.queue.occupancy - self.queue.in_flight == 0:
            nxt = self.traffic.next_time()
            if nxt is not None and nxt <= self.config.sim_time_us + EPOCH_US:
                self.events.schedule(max(nxt, now), self._try_access)
            return
        self.events.schedule(self._access_time(now, self.backoff), self._start_tx)
        self.backoff = 0

    def _start_tx(self) -> None:
        now = self.now
        self._charge_until(now)
        if self.battery.depleted:
            self._stopped = True
            return
        self._admit(now)
        if len(self.queue) == 0:
            self._try_access()
            return
        power, mcs = self.controller.choose(now) if self.controller else self.action
        batch = self.queue.take(self.config.max_ampdu)
        n = len(batch)
        frame = phy.FrameSpec(mcs, power, n, self.config.payload)
        air = phy.airtime_us(frame, self.config.preamble_us, self.mcs_table)
        acked, mpdu_end = self._receive(now, frame, air)
        self._credit_receptions(mpdu_end[acked])
        end_tx = now + air
        ba_start = end_tx + SIFS_US
        end = ba_start + BLOCK_ACK_US
        self._segments.append(_Segment(now, end_tx, TX, power))
        self._segments.append(_Segment(ba_start, end, RX))
        self._epoch.frames += 1
        self._epoch.mpdus_sent += n
        self.events.schedule(end, lambda: self._end_tx(batch, acked, mcs))

    def _credit_receptions(self, ends: np.ndarray) -> None:
        """Count each received MPDU in the epoch where its last bit arrives.

        A long aggregate can straddle epochs; crediting at frame end would
        let one epoch claim more bits than the PHY rate could carry.
        """
        if len(ends) == 0:
            return
        epochs, counts = np.unique(ends // EPOCH_US, return_counts=True)
        for e, c in zip(epochs.tolist(), counts.tolist()):
            t = int(ends[ends // EPOCH_US == e].max())
            self.events.schedule(t, lambda c=c: self._add_delivered(c))

    def _add_delivered(self, n: int) -> None:
        self._epoch.delivered += n

    def _receive(self, t: int, frame: phy.FrameSpec, air: int):
        """Per-MPDU delivery draws for a frame starting at ``t``.

        Returns the ack mask and the time each MPDU finishes arriving.
        """
        ch = self.config.channel
        self.nodes.advance(t)
        d = self.nodes.distance("tx", "rx")
        fade = phy.nakagami_power(self.rng_channel, ch.nakagami_m) if ch.fading else None
        signal = phy.rx_power_dbm(frame.tx_power, d, ch.frequency, fade)
        rate = self.mcs_table[frame.mcs].phy_rate
        n = frame.n_aggregated
        pre_end = t + self.config.preamble_us
        edges = pre_end + np.ceil(np.arange(n + 1) * self.mpdu_bits / rate).astype(np.int64)
        starts, ends = edges[:-1], edges[1:]
        noise_mw = 10.0 ** (self.noise_floor / 10.0)
        interf = np.zeros(n)
        pre_interf = 0.0
        rx_x, rx_y = self.nodes.position("rx")
        for k, sched in enumerate(self.jammers.schedules):
            mw = 10.0 ** (self.jammers.power_at(k, rx_x, rx_y) / 10.0)
            interf += mw * sched.overlaps(starts, ends)
            if sched.overlaps(t, pre_end):
                pre_interf += mw
        sig_mw = 10.0 ** (signal / 10.0)
        pre_sinr = 10.0 * math.log10(sig_mw / (noise_mw + pre_interf))
        if pre_sinr < self.mcs_table[0].min_sinr:
            return np.zeros(n, dtype=bool), ends
        sinr = 10.0 * np.log10(sig_mw / (noise_mw + interf))
        p = phy.per(sinr, frame.mcs, self.mpdu_bits, ch.per_width_db, self.mcs_table)
        return self.rng_channel.random(n) >= np.atleast_1d(p), ends

    def _end_tx(self, batch, acked, mcs) -> None:
        n_ok = int(np.count_nonzero(acked))
        _, dropped = self.queue.settle(batch, acked, self.config.retry_limit)
        self._epoch.dropped_retry += dropped
        if n_ok:
            self.last_ack = 1
            self.contention.on_success()
        else:
            self.last_ack = 0
            self.contention.on_failure()
        if self.controller is not None:
            self.controller.report(self.now, mcs, len(batch), n_ok)
        self.backoff = backoff_draw(self.contention.cw, self.rng_backoff)
        self.last_backoff = self.backoff
        self._try_access()
