"""Per-decision timing over a grid of (K, d) with static contexts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .. import rng
from ..config import ExperimentConfig, PolicySpec
from ..environment import generate_trial, normalize_rows
from ..links import IDENTITY
from .runner import build_policies, run_trial

BENCH_POLICIES = ("lin-rbmle", "lin-ucb", "gpucb", "gpucbt", "lin-ts")
BENCH_HEADER = "policy,K,d,mean_decision_time_ns,std_decision_time_ns"


@dataclass
class TimingRow:
    policy: str
    K: int
    d: int
    mean_ns: float
    std_ns: float


def parse_grid(text: str) -> list[tuple[int, int]]:
    """``"d=100,200,300;k=100,200"`` -> [(K, d), ...] ordered by K then d."""
    parts = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        key, _, values = chunk.partition("=")
        key = key.strip().lower()
        if key not in ("d", "k") or not values:
            raise ValueError(f"bad grid component {chunk!r}")
        parts[key] = [int(v) for v in values.split(",")]
    if set(parts) != {"d", "k"}:
        raise ValueError("grid needs both d=... and k=...")
    return [(K, d) for K, d in itertools.product(parts["k"], parts["d"])]


def bench_theta(seed: int, d: int) -> list[float]:
    """Unit-norm theta* for a bench cell, drawn from its own stream."""
    stream = rng.Stream(rng.stream_seed(seed, rng.name_tag(f"bench-theta-{d}")))
    return normalize_rows(stream.normal(d)).tolist()


def bench_scalability(grid, T: int = 100, trials: int = 50, seed: int = 46,
                      policies=BENCH_POLICIES) -> list[TimingRow]:
    """Mean and std of per-decision time for each (policy, K, d).

    Within a trial every policy replays the same static dataset one after
    another, and the starting policy rotates from trial to trial, so slow
    drift of the machine affects all policies alike.
    """
    rows = []
    for K, d in grid:
        config = ExperimentConfig(K=K, d=d, T=T, trials=trials, theta_star=bench_theta(seed, d),
                                  seed=seed, policies=[PolicySpec(p) for p in policies]).validate()
        data = config.data_fields()
        times: dict[str, list[np.ndarray]] = {p: [] for p in policies}
        for i in range(trials):
            trial = generate_trial(data, i)
            built = build_policies(config, i)
            shift = i % len(built)
            for name, policy in built[shift:] + built[:shift]:
                res = run_trial(trial, policy, T, config.theta_star, IDENTITY, name)
                times[name].append(res.decision_ns)
        for name in policies:
            all_ns = np.concatenate(times[name]).astype(np.float64)
            rows.append(TimingRow(name, K, d, float(all_ns.mean()), float(all_ns.std())))
    return rows


def timing_lines(rows: list[TimingRow]) -> list[str]:
    return [BENCH_HEADER] + [f"{r.policy},{r.K},{r.d},{r.mean_ns!r},{r.std_ns!r}" for r in rows]
