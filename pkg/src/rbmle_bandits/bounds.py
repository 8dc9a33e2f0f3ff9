"""Closed-form regret bounds for LinRBMLE and GLM-RBMLE.

Only the final expressions are evaluated; partial sums over the bias
schedule are computed exactly by summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .schedules import BiasSchedule, EtaSchedule


@dataclass(frozen=True)
class BoundParams:
    d: int = 3
    lam: float = 1.0
    sigma: float = 1.0
    delta: float = 0.1
    kappa_mu: float = 1.0
    L_mu: float = 1.0
    alpha: BiasSchedule = field(default_factory=BiasSchedule)
    eta: EtaSchedule = field(default_factory=EtaSchedule)

    def __post_init__(self):
        for name in ("d", "lam", "sigma", "kappa_mu", "L_mu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")


def g0(t: float, p: BoundParams) -> float:
    return p.sigma * math.sqrt(p.d * math.log((p.lam + t) / (p.lam * p.delta))) + math.sqrt(p.lam)


def g1_clamped(t: float, p: BoundParams) -> bool:
    """True when the log argument of g1 is below one and gets clamped."""
    return (p.lam + t) / p.d < 1.0


def g1(t: float, p: BoundParams) -> float:
    return math.sqrt(2 * p.d * max(math.log((p.lam + t) / p.d), 0.0))


def g2(t: float, p: BoundParams) -> float:
    inner = p.d / 2 * math.log(1 + 2 * t / p.d) + math.log(1 / p.delta)
    return p.sigma / p.kappa_mu * math.sqrt(inner)


def _alpha_values(T: int, p: BoundParams) -> np.ndarray:
    return np.array([p.alpha(t) for t in range(1, T + 1)], dtype=np.float64)


def linear_regret_bound(T: int, p: BoundParams) -> float:
    if T < 1:
        raise ValueError("T must be at least 1")
    G0, G1 = g0(T, p), g1(T, p)
    inv_sum = float(np.sum(0.5 / _alpha_values(T, p)))
    return G0**2 * inv_sum + math.sqrt(T) * G0 * G1 + 0.5 * p.alpha(T) * G1**2


def linear_regret_bound_curve(T: int, p: BoundParams) -> np.ndarray:
    """Bound evaluated at every t = 1..T (the running partial sum is shared)."""
    t = np.arange(1, T + 1, dtype=np.float64)
    alpha = _alpha_values(T, p)
    inv_sum = np.cumsum(0.5 / alpha)
    G0 = p.sigma * np.sqrt(p.d * np.log((p.lam + t) / (p.lam * p.delta))) + math.sqrt(p.lam)
    G1 = np.sqrt(2 * p.d * np.maximum(np.log((p.lam + t) / p.d), 0.0))
    return G0**2 * inv_sum + np.sqrt(t) * G0 * G1 + 0.5 * alpha * G1**2


def glm_constants(p: BoundParams) -> tuple[float, float, float]:
    L, k = p.L_mu, p.kappa_mu
    c1 = 2 * L**4 / k**4 + 1 / k**2
    c2 = 2 * L**3 / k**2 + L / k
    c3 = L**2 / 2
    return c1, c2, c3


def t0(p: BoundParams, max_t: int = 10**9) -> int:
    """Smallest t with L^3 / (2 kappa^2 eta(t)) < 1/2, by forward scan."""
    ratio = p.L_mu**3 / (2 * p.kappa_mu**2)
    t = 1
    while ratio / p.eta(t) >= 0.5:
        t += 1
        if t > max_t:
            raise ValueError("eta(t) never exceeds the threshold within max_t")
    return t


def glm_regret_bound(T: int, p: BoundParams) -> float:
    if T < 1:
        raise ValueError("T must be at least 1")
    c1, c2, c3 = glm_constants(p)
    G1, G2 = g1(T, p), g2(T, p)
    inv_sum = float(np.sum(1.0 / _alpha_values(T, p)))
    return t0(p) + c1 * p.alpha(T) * G1**2 + c2 * math.sqrt(T) * G1 * G2 + c3 * G2**2 * inv_sum


def glm_regret_bound_curve(T: int, p: BoundParams) -> np.ndarray:
    c1, c2, c3 = glm_constants(p)
    t = np.arange(1, T + 1, dtype=np.float64)
    alpha = _alpha_values(T, p)
    G1 = np.sqrt(2 * p.d * np.maximum(np.log((p.lam + t) / p.d), 0.0))
    G2 = p.sigma / p.kappa_mu * np.sqrt(p.d / 2 * np.log(1 + 2 * t / p.d) + math.log(1 / p.delta))
    return t0(p) + c1 * alpha * G1**2 + c2 * np.sqrt(t) * G1 * G2 + c3 * G2**2 * np.cumsum(1.0 / alpha)
