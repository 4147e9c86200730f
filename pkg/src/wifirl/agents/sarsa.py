"""Tabular SARSA with epsilon-greedy exploration, as a scikit-learn style estimator."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..engine import rng_stream
from ..env import N_ACTIONS, ControlAction, LinkEnv, state_index, throughput_mbps
from ._validation import check_states
from .qtable import QTable

# Agent presets: (reward weight, discount, learning rate)
PRESETS = {
    "throughput": (0.8, 0.9, 0.2),
    "balanced": (0.5, 0.9, 0.2),
    "energy": (0.2, 0.9, 0.2),
}


def greedy_action(q: QTable, s: int) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the lowest action index
    return int(np.argmax(q.row(s)))


# what the deployed policy does before it has any stored value to go on
START_ACTION = ControlAction(10, 0).index


def policy_action(q: QTable, s: int, fallback: int = START_ACTION) -> int:
    """Deployed greedy choice: argmax over stored entries only.

    Unwritten entries are an absence of experience, not a learned value of 0,
    so they never win. A state with no entries keeps ``fallback`` (normally
    the action already in use).
    """
    w = q.written(s)
    if not w.any():
        return fallback
    return int(np.argmax(np.where(w, q.row(s), -np.inf)))


def select_action(s: int, q: QTable, epsilon: float, rng: np.random.Generator) -> int:
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(q.n_actions))
    return greedy_action(q, s)


def sarsa_update(q: QTable, s: int, a: int, r: float, s2: int, a2: int, *,
                 alpha: float, gamma: float, terminal: bool = False,
                 literal: bool = False) -> float:
    """One on-policy TD update; writes and returns the new Q(s, a).

    ``literal=True`` evaluates ``(1-a)Q + a(r + g Q' - Q)``, which subtracts
    the old estimate twice; the default is the usual ``Q + a(r + g Q' - Q)``.
    """
    old = q.get(s, a)
    nxt = 0.0 if terminal else q.get(s2, a2)
    td = r + gamma * nxt - old
    new = (1.0 - alpha) * old + alpha * td if literal else old + alpha * td
    q.set(s, a, new)
    return new


def decay_epsilon(epsilon: float, decay: float, floor: float) -> float:
    return max(epsilon * decay, floor)


class SarsaAgent(BaseEstimator):
    """Joint MCS / transmit-power controller learned with SARSA.

    ``fit`` runs whole training episodes against a :class:`~wifirl.env.LinkEnv`;
    ``predict`` maps observation tuples (or state indices) to greedy action
    indices.

    Parameters
    ----------
    reward_weight : float
        Weight of the throughput term in the reward (``lambda``).
    gamma, alpha : float
        Discount factor and learning rate.
    epsilon, epsilon_decay, epsilon_floor : float
        Initial exploration probability, per-step multiplier and lower bound.
    literal_update : bool
        Use the double-subtracting variant of the update rule.
    random_state : int
        Seed for exploration draws.
    """

    def __init__(self, reward_weight=0.8, gamma=0.9, alpha=0.2, epsilon=1.0,
                 epsilon_decay=0.99998, epsilon_floor=0.01, literal_update=False,
                 random_state=0):
        self.reward_weight = reward_weight
        self.gamma = gamma
        self.alpha = alpha
        self.epsilon = epsilon
        self.epsilon_decay = epsilon_decay
        self.epsilon_floor = epsilon_floor
        self.literal_update = literal_update
        self.random_state = random_state

    def _validate_params(self):
        for name in ("gamma", "alpha", "epsilon", "epsilon_decay"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not 0.0 <= self.reward_weight <= 1.0:
            raise ValueError("reward_weight must be in [0, 1]")
        if not 0.0 <= self.epsilon_floor <= self.epsilon:
            raise ValueError("epsilon_floor must be in [0, epsilon]")

    def fit(self, env: LinkEnv, n_episodes: int = 200, *, episode_seeds=None,
            q_table: QTable | None = None, before_episode=None, callback=None):
        """Train for ``n_episodes``.

        ``episode_seeds`` (iterable of ints) seeds each episode's simulator.
        ``before_episode(episode, env)`` may reconfigure the environment before
        each reset; ``callback(episode, summary)`` runs after each episode.
        """
        self._validate_params()
        env.reward_weight = self.reward_weight
        self.q_table_ = q_table if q_table is not None else QTable()
        self.epsilon_ = float(self.epsilon)
        self.history_ = []
        self.n_steps_ = 0
        rng = rng_stream(int(self.random_state), "agent-exploration")
        seeds = list(episode_seeds) if episode_seeds is not None else list(range(n_episodes))
        for ep in range(n_episodes):
            if before_episode is not None:
                before_episode(ep, env)
            summary = self.run_episode(env, seeds[ep], rng, learn=True)
            summary["episode"] = ep
            self.history_.append(summary)
            if callback is not None:
                callback(ep, summary)
        return self

    def run_episode(self, env: LinkEnv, seed: int, rng=None, *, learn=False) -> dict:
        q = self.q_table_
        obs = env.reset(seed)
        s = state_index(obs)
        eps = self.epsilon_ if learn else 0.0
        a = select_action(s, q, eps, rng) if learn else policy_action(q, s)
        total = 0.0
        res = None
        while not env.done:
            res = env.step(a)
            s2 = state_index(res.next_state)
            if learn:
                a2 = select_action(s2, q, self.epsilon_, rng)
                sarsa_update(q, s, a, res.reward, s2, a2, alpha=self.alpha, gamma=self.gamma,
                             terminal=res.terminal is not None, literal=self.literal_update)
                self.epsilon_ = decay_epsilon(self.epsilon_, self.epsilon_decay, self.epsilon_floor)
                self.n_steps_ += 1
            else:
                a2 = policy_action(q, s2, a)
            total += res.reward
            s, a = s2, a2
        return episode_summary(env, total, res, self.epsilon_ if learn else 0.0)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "q_table_")
        idx = check_states(X)
        return np.array([policy_action(self.q_table_, int(s)) for s in idx], dtype=np.int64)

    def act(self, obs, previous: int = START_ACTION) -> ControlAction:
        check_is_fitted(self, "q_table_")
        return ControlAction.from_index(policy_action(self.q_table_, state_index(obs), previous))

    @classmethod
    def from_qtable(cls, q: QTable, **params) -> "SarsaAgent":
        agent = cls(**params)
        agent.q_table_ = q
        agent.epsilon_ = 0.0
        agent.history_ = []
        return agent


def episode_summary(env: LinkEnv, total_reward: float, last, epsilon: float) -> dict:
    sim = env.sim
    t = sim.totals
    elapsed = max(t.t_end, 1) / 1e6
    return {
        "total_reward": total_reward,
        "throughput_mbps": throughput_mbps(t.delivered, env.config.payload, elapsed),
        "energy_j": sim.meter.total,
        "loss_pct": 100.0 * t.dropped / t.arrivals if t.arrivals else 0.0,
        "epsilon": epsilon,
        "terminal": (last.terminal if last is not None else None) or "none",
        "steps": env.steps,
        "delivered": t.delivered,
        "arrivals": t.arrivals,
    }
