"""Joint rate and transmit-power control of a jammed 802.11ac link with tabular SARSA."""
from .agents import FixedPolicy, MinstrelPolicy, QTable, SarsaAgent, load_qtable, save_qtable
from .config import ExperimentConfig
from .env import ControlAction, LinkEnv, StateObservation
from .simulation import EpochOutcome, LinkConfig, LinkSimulation

__version__ = "0.1.0"

__all__ = [
    "ControlAction", "EpochOutcome", "ExperimentConfig", "FixedPolicy", "LinkConfig", "LinkEnv",
    "LinkSimulation", "MinstrelPolicy", "QTable", "SarsaAgent", "StateObservation",
    "load_qtable", "save_qtable",
]
