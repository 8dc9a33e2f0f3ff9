"""Experiment orchestration: replay, statistics, timing and the CLI."""

from .bench import bench_scalability
from .runner import ExperimentResult, TrialResult, run_experiment, run_trial
from .stats import RegretSummary, check_bound, summarize

__all__ = [
    "ExperimentResult",
    "RegretSummary",
    "TrialResult",
    "bench_scalability",
    "check_bound",
    "run_experiment",
    "run_trial",
    "summarize",
]
