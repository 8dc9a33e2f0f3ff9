"""Index policies for the standard linear bandit.

LinRBMLE scores arm ``a`` by

    theta_hat^T x_a + 0.5 * alpha(t) * ||x_a||^2_{V^{-1}}

which is what the reward-biased ridge objective reduces to once its per-arm
maximizer ``V^{-1}(b + alpha x_a)`` is substituted back in.  LinUCB, GPUCB,
GPUCB-Tuned and LinTS share the same ridge state and differ only in the
exploration term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import Stream
from ..schedules import BiasSchedule
from ..spd import RidgeState, quad_form, quad_forms


class LinearPolicyState(RidgeState):
    """Ridge state plus the 1-based decision round ``t``."""

    @property
    def t(self) -> int:
        return self.n_updates + 1


def _quad(state: RidgeState, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    return quad_forms(state.Vinv, x) if x.ndim == 2 else quad_form(state.Vinv, x)


def lin_rbmle_index(state: RidgeState, x: np.ndarray, alpha: float):
    """RBMLE index for one context (d,) or a block of contexts (K, d)."""
    x = np.asarray(x, dtype=np.float64)
    return x @ state.theta_hat + 0.5 * alpha * _quad(state, x)


def closed_form_biased_estimate(state: RidgeState, x: np.ndarray, alpha: float) -> np.ndarray:
    """Unique maximizer ``V^{-1}(b + alpha x)`` of the biased ridge objective."""
    return state.Vinv @ (state.b + alpha * np.asarray(x, dtype=np.float64))


def lin_ucb_index(state: RidgeState, x: np.ndarray, gamma: float):
    x = np.asarray(x, dtype=np.float64)
    return x @ state.theta_hat + gamma * np.sqrt(_quad(state, x))


def gpucb_width(t: int, K: int, delta: float, variant: str = "standard", c: float = 0.9) -> float:
    """sqrt(beta_t) for GPUCB (``standard``) or GPUCB-Tuned (``tuned``)."""
    if variant == "standard":
        beta = 2.0 * math.log(K * t * t * math.pi**2 / (6.0 * delta))
    elif variant == "tuned":
        beta = c * max(math.log(t), 0.0)
    else:
        raise ValueError(f"unknown GPUCB variant {variant!r}")
    return math.sqrt(max(beta, 0.0))


def gpucb_index(state: RidgeState, x, t: int, K: int, delta: float = 1e-5,
                variant: str = "standard", c: float = 0.9):
    return lin_ucb_index(state, x, gpucb_width(t, K, delta, variant, c))


def lin_ts_scale(t: int, d: int, delta: float = 0.5, epsilon: float = 0.9) -> float:
    """Default posterior scale sqrt((24/eps) * d * log(max(t, 2) / delta))."""
    return math.sqrt(24.0 / epsilon * d * math.log(max(t, 2) / delta))


def lin_ts_select(state: RidgeState, contexts: np.ndarray, t: int, delta: float,
                  epsilon: float, stream: Stream, scale: float | None = None) -> int:
    """Sample theta ~ N(theta_hat, v_t^2 V^{-1}) and play its greedy arm."""
    if scale is None:
        scale = lin_ts_scale(t, state.d, delta, epsilon)
    z = stream.normal(state.d)
    if scale == 0.0:
        theta = state.theta_hat
    else:
        chol = np.linalg.cholesky(state.Vinv)
        theta = state.theta_hat + scale * (chol @ z)
    return int(np.argmax(contexts @ theta))


def update_linear(state: RidgeState, x: np.ndarray, r: float) -> RidgeState:
    state.update(x, r)
    return state


@dataclass(frozen=True)
class LinearIndexConfig:
    """Which deterministic index to compute and with what constants."""

    kind: str = "lin-rbmle"
    alpha: BiasSchedule = BiasSchedule()
    gamma: float = 1.0
    delta: float = 1e-5
    c: float = 0.9
    K: int = 10


def linear_indices(state: RidgeState, contexts: np.ndarray, t: int, cfg: LinearIndexConfig) -> np.ndarray:
    if cfg.kind == "lin-rbmle":
        return lin_rbmle_index(state, contexts, cfg.alpha(t))
    if cfg.kind == "lin-ucb":
        return lin_ucb_index(state, contexts, cfg.gamma)
    if cfg.kind == "gpucb":
        return gpucb_index(state, contexts, t, cfg.K, cfg.delta, "standard")
    if cfg.kind == "gpucbt":
        return gpucb_index(state, contexts, t, cfg.K, cfg.delta, "tuned", cfg.c)
    raise ValueError(f"unknown linear index {cfg.kind!r}")


def select_arm_linear(state: RidgeState, contexts: np.ndarray, cfg: LinearIndexConfig,
                      t: int | None = None) -> int:
    """Lowest-index argmax of the configured index."""
    if t is None:
        t = state.n_updates + 1
    return int(np.argmax(linear_indices(state, contexts, t, cfg)))


# -- policy objects driven by the harness ---------------------------------

class LinearPolicy:
    """Deterministic index policy over a shared ridge state."""

    def __init__(self, d: int, cfg: LinearIndexConfig, lam: float = 1.0, refresh_every: int = 1000):
        self.cfg = cfg
        self.state = LinearPolicyState(d, lam, refresh_every)

    def select(self, contexts: np.ndarray, t: int) -> int:
        return int(np.argmax(linear_indices(self.state, contexts, t, self.cfg)))

    def update(self, x: np.ndarray, r: float) -> None:
        self.state.update(x, r)


class LinRBMLE(LinearPolicy):
    def __init__(self, d: int, lam: float = 1.0, alpha: BiasSchedule | None = None, refresh_every: int = 1000):
        super().__init__(d, LinearIndexConfig("lin-rbmle", alpha=alpha or BiasSchedule()), lam, refresh_every)

    def select(self, contexts, t):
        s = self.state
        xv = contexts @ s.Vinv
        idx = contexts @ s.theta_hat + (0.5 * self.cfg.alpha(t)) * np.einsum("ij,ij->i", xv, contexts)
        return int(idx.argmax())


class LinUCB(LinearPolicy):
    def __init__(self, d: int, gamma: float = 1.0, lam: float = 1.0, refresh_every: int = 1000):
        super().__init__(d, LinearIndexConfig("lin-ucb", gamma=gamma), lam, refresh_every)

    def select(self, contexts, t):
        s = self.state
        xv = contexts @ s.Vinv
        idx = contexts @ s.theta_hat + self.cfg.gamma * np.sqrt(np.einsum("ij,ij->i", xv, contexts))
        return int(idx.argmax())


class GPUCB(LinearPolicy):
    def __init__(self, d: int, K: int, delta: float = 1e-5, lam: float = 1.0, refresh_every: int = 1000):
        super().__init__(d, LinearIndexConfig("gpucb", delta=delta, K=K), lam, refresh_every)


class GPUCBTuned(LinearPolicy):
    def __init__(self, d: int, c: float = 0.9, lam: float = 1.0, refresh_every: int = 1000):
        super().__init__(d, LinearIndexConfig("gpucbt", c=c), lam, refresh_every)


class LinTS:
    def __init__(self, d: int, stream: Stream, delta: float = 0.5, epsilon: float = 0.9,
                 lam: float = 1.0, scale: float | None = None, refresh_every: int = 1000):
        self.state = LinearPolicyState(d, lam, refresh_every)
        self.stream = stream
        self.delta = delta
        self.epsilon = epsilon
        self.scale = scale

    def select(self, contexts, t):
        return lin_ts_select(self.state, contexts, t, self.delta, self.epsilon, self.stream, self.scale)

    def update(self, x, r):
        self.state.update(x, r)
