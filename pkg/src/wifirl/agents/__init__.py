from .minstrel import FixedPolicy, MinstrelPolicy, MinstrelRateControl, best_rate, ewma
from .qtable import QTable, QTableFormatError, load_qtable, save_qtable
from .sarsa import PRESETS, SarsaAgent, decay_epsilon, greedy_action, policy_action, sarsa_update, select_action

__all__ = [
    "FixedPolicy", "MinstrelPolicy", "MinstrelRateControl", "best_rate", "ewma",
    "QTable", "QTableFormatError", "load_qtable", "save_qtable",
    "PRESETS", "SarsaAgent", "decay_epsilon", "greedy_action", "policy_action", "sarsa_update", "select_action",
]
