"""Cross-trial statistics of final regret and bound-coverage checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bounds import BoundParams, glm_regret_bound_curve, linear_regret_bound_curve

DEFAULT_QUANTILES = (0.10, 0.25, 0.50, 0.75, 0.90, 0.95)


@dataclass
class RegretSummary:
    policy: str
    mean: float
    std: float
    quantiles: dict[float, float]
    mean_decision_time_ns: float = 0.0


def summarize(final_regrets, policy: str = "", quantiles=DEFAULT_QUANTILES,
              mean_decision_time_ns: float = 0.0) -> RegretSummary:
    """Mean, population std and type-7 (linear interpolation) quantiles."""
    values = np.asarray(list(final_regrets), dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot summarize an empty list of regrets")
    levels = [float(q) for q in quantiles]
    if any(not 0.0 <= q <= 1.0 for q in levels):
        raise ValueError("quantile levels must lie in [0, 1]")
    values = np.sort(values)
    qs = np.quantile(values, levels, method="linear")
    return RegretSummary(
        policy=policy,
        mean=float(values.mean()),
        std=float(values.std(ddof=0)),
        quantiles={q: float(v) for q, v in zip(levels, qs)},
        mean_decision_time_ns=float(mean_decision_time_ns),
    )


@dataclass
class BoundReport:
    policy: str
    kind: str
    dominated: list[bool]
    bound: np.ndarray = field(repr=False)
    first_violation: list[int | None] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return sum(self.dominated) / len(self.dominated) if self.dominated else 0.0


def check_bound(cum_regrets, params: BoundParams, kind: str = "linear", policy: str = "") -> BoundReport:
    """Compare each trial's cumulative-regret path with the bound at every t.

    ``cum_regrets`` is a sequence of 1-D arrays (one per trial, indexed by
    t - 1).  A trial is dominated when its path never exceeds the bound.
    """
    paths = [np.asarray(p, dtype=np.float64) for p in cum_regrets]
    if not paths:
        raise ValueError("no trials to check")
    T = max(len(p) for p in paths)
    if kind == "linear":
        bound = linear_regret_bound_curve(T, params)
    elif kind == "glm":
        bound = glm_regret_bound_curve(T, params)
    else:
        raise ValueError(f"unknown bound kind {kind!r}")
    dominated, first = [], []
    for path in paths:
        over = np.flatnonzero(path > bound[: len(path)])
        dominated.append(over.size == 0)
        first.append(int(over[0]) + 1 if over.size else None)
    return BoundReport(policy, kind, dominated, bound, first)
