"""Reset/step environment over :class:`LinkSimulation` with the discretized link state."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .energy import MAX_TX_DBM, MIN_TX_DBM, battery_bucket
from .engine import EPOCH_US
from .mac import CW_LADDER
from .phy import N_MCS
from .simulation import EpochOutcome, LinkConfig, LinkSimulation

N_QUEUE_LEVELS = 10
N_CW = len(CW_LADDER)
N_BACKOFF = 128
N_ACK = 2
N_BATTERY_LEVELS = 10
STATE_SHAPE = (N_QUEUE_LEVELS, N_CW, N_BACKOFF, N_ACK, N_BATTERY_LEVELS)
N_STATES = int(np.prod(STATE_SHAPE))  # 179_200
N_POWER = MAX_TX_DBM - MIN_TX_DBM + 1
N_ACTIONS = N_POWER * N_MCS  # 100

LOSS_LIMIT = 0.05
BATTERY_LIMIT = 0.10


class StateObservation(NamedTuple):
    n_t: int  # queue occupancy percent, 10..100
    c_w: int  # index into CW_LADDER
    b_fs: int  # backoff slots // 8
    r_p: int  # last aggregate acknowledged
    b_l: int  # battery percent, 10..100

    @property
    def index(self) -> int:
        return state_index(self)


class ControlAction(NamedTuple):
    power: int  # dBm, 1..10
    mcs: int  # 0..9

    @property
    def index(self) -> int:
        return action_index(self)

    @classmethod
    def from_index(cls, idx: int) -> "ControlAction":
        if not 0 <= idx < N_ACTIONS:
            raise ValueError(f"action index out of range: {idx}")
        p, m = divmod(int(idx), N_MCS)
        return cls(p + MIN_TX_DBM, m)


def action_index(a: ControlAction) -> int:
    power, mcs = a
    if not (MIN_TX_DBM <= power <= MAX_TX_DBM and 0 <= mcs < N_MCS):
        raise ValueError(f"invalid action {tuple(a)}")
    return (power - MIN_TX_DBM) * N_MCS + mcs


def discretize_backoff(b_f: int) -> int:
    if not 0 <= b_f <= CW_LADDER[-1]:
        raise ValueError(f"backoff {b_f} outside [0, {CW_LADDER[-1]}]")
    return int(b_f) // 8


def queue_bucket(occupancy: int, capacity: int) -> int:
    tenths = math.ceil(round(occupancy / capacity * 10, 9))
    return min(max(tenths * 10, 10), 100)


def state_index(s: StateObservation) -> int:
    n_t, c_w, b_fs, r_p, b_l = s
    digits = (n_t // 10 - 1, c_w, b_fs, r_p, b_l // 10 - 1)
    if n_t % 10 or b_l % 10 or any(not 0 <= d < r for d, r in zip(digits, STATE_SHAPE)):
        raise ValueError(f"invalid state {tuple(s)}")
    idx = 0
    for d, r in zip(digits, STATE_SHAPE):
        idx = idx * r + d
    return idx


def decode_state(idx: int) -> StateObservation:
    if not 0 <= idx < N_STATES:
        raise ValueError(f"state index out of range: {idx}")
    digits = []
    for r in reversed(STATE_SHAPE):
        idx, d = divmod(idx, r)
        digits.append(d)
    n, c, b, r_p, bl = reversed(digits)
    return StateObservation((n + 1) * 10, c, b, r_p, (bl + 1) * 10)


def reward(r_p_count, e_c, n_t_total, e_t_total, weight):
    """Convex mix of normalized delivered packets and (negated) consumed energy."""
    return weight * (r_p_count * 100.0 / n_t_total) + (1.0 - weight) * (-1.0 * e_c * 100.0 / e_t_total)


def throughput_mbps(n_p, p_s, t_s):
    if t_s <= 0:
        raise ValueError("t_s must be positive")
    return n_p * p_s * 8 / (t_s * 1e6)


class StepResult(NamedTuple):
    next_state: StateObservation
    reward: float
    terminal: str | None  # None, "battery" or "loss"
    truncated: bool  # ran out of simulated time (or battery, without terminal states)
    info: EpochOutcome


class EpisodeTerminated(RuntimeError):
    pass


class LinkEnv:
    """One episode = one fresh :class:`LinkSimulation`.

    ``terminal_states=False`` reproduces test runs: the episode lasts the full
    simulated time or until the battery is completely empty.
    """

    def __init__(self, config: LinkConfig, reward_weight: float = 0.8, *,
                 energy_reference: str = "capacity", terminal_states: bool = True,
                 controller_factory=None):
        if not 0.0 <= reward_weight <= 1.0:
            raise ValueError("reward_weight must be in [0, 1]")
        if energy_reference not in ("capacity", "episode_start"):
            raise ValueError(f"unknown energy_reference {energy_reference!r}")
        self.config = config
        self.reward_weight = reward_weight
        self.energy_reference = energy_reference
        self.terminal_states = terminal_states
        self.controller_factory = controller_factory
        self.sim: LinkSimulation | None = None
        self.done = True

    @property
    def max_steps(self) -> int:
        return self.config.sim_time_us // EPOCH_US

    @property
    def packets_total(self) -> float:
        return max(self.config.arrival_rate * self.config.sim_time_us / 1e6, 1.0)

    def reset(self, seed: int = 0) -> StateObservation:
        controller = self.controller_factory(seed) if self.controller_factory else None
        self.sim = LinkSimulation(self.config, seed, controller)
        b = self.sim.battery
        self.energy_total = b.capacity if self.energy_reference == "capacity" else b.initial
        self.steps = 0
        self.done = False
        self.terminal = None
        return self.observe()

    def observe(self) -> StateObservation:
        sim = self.sim
        return StateObservation(
            queue_bucket(sim.queue.occupancy, sim.queue.capacity),
            sim.contention.cw_index,
            discretize_backoff(sim.last_backoff),
            sim.last_ack,
            battery_bucket(sim.battery.remaining, sim.battery.capacity),
        )

    def step(self, action: ControlAction | int | None) -> StepResult:
        if self.done:
            raise EpisodeTerminated("episode already finished; call reset()")
        if isinstance(action, (int, np.integer)):
            action = ControlAction.from_index(int(action))
        if action is not None:
            action_index(action)  # validates
        out = self.sim.run_epoch(None if action is None else tuple(action))
        self.steps += 1
        r = reward(out.delivered, out.energy_j, self.packets_total, self.energy_total,
                   self.reward_weight)
        terminal = None
        truncated = False
        totals = self.sim.totals
        if self.terminal_states:
            if self.sim.battery.fraction < BATTERY_LIMIT:
                terminal = "battery"
            elif totals.arrivals > 0 and totals.dropped > LOSS_LIMIT * totals.arrivals:
                terminal = "loss"
        elif self.sim.battery.depleted:
            truncated = True
        if self.steps >= self.max_steps:
            truncated = True
        self.terminal = terminal
        self.done = terminal is not None or truncated
        return StepResult(self.observe(), r, terminal, truncated, out)
