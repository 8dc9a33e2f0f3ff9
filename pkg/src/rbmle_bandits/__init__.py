"""Reward-biased maximum-likelihood index policies for contextual bandits."""

from .config import ConfigError, ExperimentConfig, PolicySpec
from .environment import build_dataset, optimal_arm, pseudo_regret_step
from .links import LinkFunction

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "LinkFunction",
    "PolicySpec",
    "build_dataset",
    "optimal_arm",
    "pseudo_regret_step",
]
