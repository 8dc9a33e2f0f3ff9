"""Policy registry.

Every policy exposes ``select(contexts, t) -> arm`` and ``update(x, r)``.
Factories take the hyperparameter table from the experiment config plus a
:class:`PolicyContext` describing the problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..links import LinkFunction
from ..rng import Stream
from ..schedules import BiasSchedule, EtaSchedule
from .glm import GlmRBMLE, UCBGLM
from .linear import GPUCB, GPUCBTuned, LinRBMLE, LinTS, LinUCB


@dataclass
class PolicyContext:
    d: int
    K: int
    T: int
    link: LinkFunction
    alpha: BiasSchedule
    eta: EtaSchedule
    stream: Stream
    theta_star: np.ndarray | None = None


class OraclePolicy:
    """Always plays the optimal arm; a zero-regret reference."""

    def __init__(self, theta_star):
        self.theta_star = np.asarray(theta_star, dtype=np.float64)

    def select(self, contexts, t):
        return int(np.argmax(contexts @ self.theta_star))

    def update(self, x, r):
        pass


class UniformPolicy:
    def __init__(self, K: int, stream: Stream):
        self.K = K
        self.stream = stream

    def select(self, contexts, t):
        return int(self.stream.integers(1, self.K)[0])

    def update(self, x, r):
        pass


def _lin_rbmle(p, ctx):
    alpha = BiasSchedule.from_dict(p["alpha"]) if "alpha" in p else ctx.alpha
    return LinRBMLE(ctx.d, lam=p.get("lambda", 1.0), alpha=alpha, refresh_every=p.get("refresh_every", 1000))


def _lin_ucb(p, ctx):
    return LinUCB(ctx.d, gamma=p.get("gamma", 1.0), lam=p.get("lambda", 1.0),
                  refresh_every=p.get("refresh_every", 1000))


def _gpucb(p, ctx):
    return GPUCB(ctx.d, ctx.K, delta=p.get("delta", 1e-5), lam=p.get("lambda", 1.0),
                 refresh_every=p.get("refresh_every", 1000))


def _gpucbt(p, ctx):
    return GPUCBTuned(ctx.d, c=p.get("c", 0.9), lam=p.get("lambda", 1.0),
                      refresh_every=p.get("refresh_every", 1000))


def _lin_ts(p, ctx):
    return LinTS(ctx.d, ctx.stream, delta=p.get("delta", 0.5), epsilon=p.get("epsilon", 0.9),
                 lam=p.get("lambda", 1.0), scale=p.get("scale"), refresh_every=p.get("refresh_every", 1000))


def _glm_rbmle(p, ctx):
    alpha = BiasSchedule.from_dict(p["alpha"]) if "alpha" in p else ctx.alpha
    eta = EtaSchedule.from_dict(p["eta"]) if "eta" in p else ctx.eta
    return GlmRBMLE(ctx.d, ctx.link, lam=p.get("lambda", 1.0), alpha=alpha, eta=eta)


def _ucb_glm(p, ctx):
    return UCBGLM(ctx.d, ctx.K, ctx.T, ctx.link, lam=p.get("lambda", 1.0), delta=p.get("delta", 0.1),
                  sigma=p.get("sigma", 1.0), tau=p.get("tau"), chi=p.get("chi"))


def _oracle(p, ctx):
    return OraclePolicy(ctx.theta_star)


def _uniform(p, ctx):
    return UniformPolicy(ctx.K, ctx.stream)


REGISTRY = {
    "lin-rbmle": _lin_rbmle,
    "lin-ucb": _lin_ucb,
    "gpucb": _gpucb,
    "gpucbt": _gpucbt,
    "lin-ts": _lin_ts,
    "glm-rbmle": _glm_rbmle,
    "ucb-glm": _ucb_glm,
    "oracle": _oracle,
    "uniform": _uniform,
}


def make_policy(name: str, params: dict, ctx: PolicyContext):
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown policy {name!r}") from None
    return factory(dict(params or {}), ctx)
