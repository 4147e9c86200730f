"""Minstrel-style rate adaptation baseline at a fixed transmit power."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..engine import rng_stream
from ..env import ControlAction, action_index
from ..phy import MCS_TABLE
from ._validation import check_states


def ewma(old: float, sample: float, weight: float) -> float:
    return (1.0 - weight) * old + weight * sample


class MinstrelRateControl:
    """Per-run Minstrel state, attached to a simulation as its rate controller.

    Success probabilities are EWMA-smoothed once per update interval; between
    updates every frame goes out at the best-throughput rate except for a
    ``lookaround`` fraction sent at a random other rate.
    """

    def __init__(self, rng: np.random.Generator, lookaround=0.1, update_interval_us=100_000,
                 ewma_weight=0.25, tx_power=10, rates=None):
        self.rng = rng
        self.lookaround = lookaround
        self.update_interval_us = update_interval_us
        self.ewma_weight = ewma_weight
        self.tx_power = tx_power
        self.rates = np.array([m.phy_rate for m in MCS_TABLE] if rates is None else rates, dtype=float)
        n = len(self.rates)
        self.prob = np.full(n, np.nan)
        self.attempts = np.zeros(n, dtype=np.int64)
        self.successes = np.zeros(n, dtype=np.int64)
        self.next_update = update_interval_us
        self.best = n - 1
        self.history: list[int] = []

    @property
    def throughput(self) -> np.ndarray:
        """Estimated goodput per rate; NaN where no data has been collected yet."""
        return self.prob * self.rates

    def update(self) -> None:
        seen = self.attempts > 0
        ratio = np.divide(self.successes, self.attempts, out=np.zeros(len(self.rates)), where=seen)
        fresh = seen & np.isnan(self.prob)
        self.prob[fresh] = ratio[fresh]
        old = seen & ~fresh
        self.prob[old] = ewma(self.prob[old], ratio[old], self.ewma_weight)
        self.attempts[:] = 0
        self.successes[:] = 0
        self.best = best_rate(self.throughput)
        self.history.append(self.best)

    def choose(self, now: int) -> tuple[int, int]:
        while now >= self.next_update:
            self.update()
            self.next_update += self.update_interval_us
        mcs = self.best
        if self.rng.random() < self.lookaround:
            others = [i for i in range(len(self.rates)) if i != self.best]
            mcs = int(others[self.rng.integers(len(others))])
        return self.tx_power, mcs

    def report(self, now: int, mcs: int, sent: int, acked: int) -> None:
        self.attempts[mcs] += sent
        self.successes[mcs] += acked


def best_rate(throughput: np.ndarray) -> int:
    """Index of the highest estimated throughput among rates with data.

    Falls back to the lowest rate when nothing has a positive estimate.
    """
    tp = np.where(np.isnan(throughput), -np.inf, throughput)
    i = int(np.argmax(tp))
    return i if tp[i] > 0 else 0


class MinstrelPolicy(BaseEstimator):
    """Configuration holder that builds a fresh :class:`MinstrelRateControl` per run."""

    def __init__(self, lookaround=0.1, update_interval_us=100_000, ewma_weight=0.25, tx_power=10,
                 random_state=0):
        self.lookaround = lookaround
        self.update_interval_us = update_interval_us
        self.ewma_weight = ewma_weight
        self.tx_power = tx_power
        self.random_state = random_state

    def fit(self, env=None, *args, **kwargs):
        return self

    def controller(self, seed: int) -> MinstrelRateControl:
        rng = rng_stream(int(self.random_state) * 1_000_003 + int(seed), "minstrel")
        return MinstrelRateControl(rng, self.lookaround, self.update_interval_us,
                                   self.ewma_weight, self.tx_power)


class FixedPolicy(BaseEstimator):
    """Always the same (power, MCS); useful for calibration runs."""

    def __init__(self, power=10, mcs=0):
        self.power = power
        self.mcs = mcs

    def fit(self, env=None, *args, **kwargs):
        return self

    def predict(self, X):
        n = len(check_states(X))
        return np.full(n, action_index(ControlAction(self.power, self.mcs)), dtype=np.int64)
