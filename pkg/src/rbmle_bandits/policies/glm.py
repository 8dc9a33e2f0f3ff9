"""Generalized-linear policies: GLM-RBMLE and the UCB-GLM baseline.

For every arm GLM-RBMLE solves the reward-biased first-order condition

    sum_s (r_s - mu(x_s^T theta)) x_s - lambda theta + alpha(t) x_a = 0

by damped Newton iteration, then scores the arm with
``loglik(theta_a) + eta(t) alpha(t) theta_a^T x_a - lambda/2 ||theta_a||^2``.
The log-likelihood drops the theta-independent normalizer of the
exponential family, so it is ``sum_s r_s z_s - b(z_s)`` with ``b' = mu``.

All solves for one round are batched over arms: ``theta`` has shape (K, d).
"""

from __future__ import annotations

import math

import numpy as np

from ..links import LinkFunction
from ..schedules import BiasSchedule, EtaSchedule
from ..spd import RidgeState, quad_forms

GRAD_TOL = 1e-8
MAX_ITER = 100
MAX_HALVINGS = 60


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class GlmPolicyState:
    """History of pulled contexts and rewards plus per-arm warm starts."""

    def __init__(self, d: int, lam: float = 1.0, link: LinkFunction | None = None, K: int | None = None):
        if lam <= 0:
            raise ValueError("lambda must be positive")
        self.d = d
        self.lam = float(lam)
        self.link = link or LinkFunction("logistic")
        self._X = np.empty((64, d))
        self._r = np.empty(64)
        self.n = 0
        self.warm_starts = np.zeros((K, d)) if K else None
        self.mle_warm = np.zeros(d)

    @property
    def t(self) -> int:
        return self.n + 1

    @property
    def X(self) -> np.ndarray:
        return self._X[: self.n]

    @property
    def r(self) -> np.ndarray:
        return self._r[: self.n]

    def append(self, x: np.ndarray, r: float) -> None:
        if self.n == len(self._r):
            self._X = np.concatenate([self._X, np.empty_like(self._X)])
            self._r = np.concatenate([self._r, np.empty_like(self._r)])
        self._X[self.n] = x
        self._r[self.n] = r
        self.n += 1


def glm_log_likelihood(X: np.ndarray, r: np.ndarray, theta: np.ndarray, link: LinkFunction):
    """sum_s r_s z_s - b(z_s) with z = X theta; ``theta`` may be (d,) or (K, d)."""
    theta = np.asarray(theta, dtype=np.float64)
    if len(r) == 0:
        return 0.0 if theta.ndim == 1 else np.zeros(theta.shape[0])
    z = X @ theta.T
    out = r @ z - np.asarray(link.antideriv(z)).sum(axis=0)
    return float(out) if theta.ndim == 1 else out


def _objective(X, r, link, lam, theta, xa, alpha):
    ll = glm_log_likelihood(X, r, theta, link)
    return ll + alpha * np.einsum("kd,kd->k", theta, xa) - 0.5 * lam * np.einsum("kd,kd->k", theta, theta)


def _gradient(X, r, link, lam, theta, xa, alpha, z=None):
    if z is None:
        z = X @ theta.T
    resid = r[:, None] - link.mean(z)
    return resid.T @ X - lam * theta + alpha * xa


def _hessian(X, link, lam, z):
    w = np.asarray(link.deriv(z))  # (n, K)
    xw = X[:, None, :] * w[:, :, None]  # (n, K, d)
    h = np.tensordot(xw, X, axes=([0], [0]))  # (K, d, d)
    d = X.shape[1]
    return -h - lam * np.eye(d)


def solve_biased(X: np.ndarray, r: np.ndarray, link: LinkFunction, lam: float,
                 xa: np.ndarray, alpha: float, theta0: np.ndarray | None = None,
                 tol: float = GRAD_TOL, max_iter: int = MAX_ITER) -> np.ndarray:
    """Batched damped Newton for the biased first-order condition.

    ``xa`` is (K, d); returns the (K, d) maximizers.  Raises
    :class:`SolverError` if some arm has not reached gradient norm ``tol``
    after ``max_iter`` iterations.
    """
    xa = np.atleast_2d(np.asarray(xa, dtype=np.float64))
    K, d = xa.shape
    if len(r) == 0:
        return (alpha / lam) * xa
    theta = np.zeros((K, d)) if theta0 is None else np.array(theta0, dtype=np.float64).reshape(K, d)
    z = X @ theta.T
    grad = _gradient(X, r, link, lam, theta, xa, alpha, z)
    gnorm = np.linalg.norm(grad, axis=1)
    f = _objective(X, r, link, lam, theta, xa, alpha)
    for _ in range(max_iter):
        active = gnorm > tol
        if not active.any():
            return theta
        ia = np.flatnonzero(active)
        H = _hessian(X, link, lam, z[:, ia])
        step = -np.linalg.solve(H, grad[ia][:, :, None])[:, :, 0]
        th_a, f_a = theta[ia], f[ia]
        scale = np.ones(len(ia))
        for _ in range(MAX_HALVINGS):
            cand = th_a + scale[:, None] * step
            f_new = _objective(X, r, link, lam, cand, xa[ia], alpha)
            bad = f_new < f_a - 1e-12 * (1.0 + np.abs(f_a))
            if not bad.any():
                break
            scale[bad] *= 0.5
        theta[ia] = cand
        f[ia] = f_new
        z[:, ia] = X @ cand.T
        grad[ia] = _gradient(X, r, link, lam, cand, xa[ia], alpha, z[:, ia])
        gnorm[ia] = np.linalg.norm(grad[ia], axis=1)
    if (gnorm > tol).any():
        raise SolverError("Newton iteration did not converge", float(gnorm.max()))
    return theta


def glm_rbmle_arm_solve(state: GlmPolicyState, x_a: np.ndarray, alpha: float,
                        warm: np.ndarray | None = None) -> np.ndarray:
    """theta_bar for a single arm context ``x_a``."""
    return solve_biased(state.X, state.r, state.link, state.lam, x_a[None, :], alpha, warm)[0]


def biased_residual(state: GlmPolicyState, theta: np.ndarray, x_a: np.ndarray, alpha: float) -> float:
    g = _gradient(state.X, state.r, state.link, state.lam, theta[None, :], x_a[None, :], alpha)
    return float(np.linalg.norm(g))


def biased_hessian(state: GlmPolicyState, theta: np.ndarray) -> np.ndarray:
    z = state.X @ theta[:, None]
    return _hessian(state.X, state.link, state.lam, z)[0]


def biased_objective(state: GlmPolicyState, theta: np.ndarray, x_a: np.ndarray, alpha: float) -> float:
    return float(_objective(state.X, state.r, state.link, state.lam, theta[None, :], x_a[None, :], alpha)[0])


def glm_rbmle_score(state: GlmPolicyState, theta_bar, x_a, alpha: float, eta: float):
    """Arm score; vectorized when ``theta_bar`` and ``x_a`` are (K, d)."""
    theta_bar = np.asarray(theta_bar, dtype=np.float64)
    x_a = np.asarray(x_a, dtype=np.float64)
    ll = glm_log_likelihood(state.X, state.r, theta_bar, state.link)
    inner = np.sum(theta_bar * x_a, axis=-1)
    sq = np.sum(theta_bar * theta_bar, axis=-1)
    return ll + eta * alpha * inner - 0.5 * state.lam * sq


def select_arm_glm(state: GlmPolicyState, contexts: np.ndarray, alpha: float, eta: float) -> int:
    K = contexts.shape[0]
    if state.warm_starts is None or state.warm_starts.shape[0] != K:
        state.warm_starts = np.zeros((K, state.d))
    theta_bar = solve_biased(state.X, state.r, state.link, state.lam, contexts, alpha, state.warm_starts)
    state.warm_starts = theta_bar
    return int(np.argmax(glm_rbmle_score(state, theta_bar, contexts, alpha, eta)))


def glm_mle(state: GlmPolicyState) -> np.ndarray:
    """Ridge-regularized GLM estimate (the alpha = 0 solve), warm-started."""
    theta = solve_biased(state.X, state.r, state.link, state.lam, np.zeros((1, state.d)), 0.0,
                         state.mle_warm[None, :])[0]
    state.mle_warm = theta
    return theta


def ucb_glm_chi(sigma: float, kappa: float, d: int, T: int, delta: float = 0.1) -> float:
    return sigma / kappa * math.sqrt(d / 2.0 * math.log(1.0 + 2.0 * T / d) + math.log(1.0 / delta))


def ucb_glm_index(theta_hat: np.ndarray, Vinv: np.ndarray, x: np.ndarray, chi: float):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return float(x @ theta_hat + chi * math.sqrt(x @ Vinv @ x))
    return x @ theta_hat + chi * np.sqrt(quad_forms(Vinv, x))


# -- policy objects --------------------------------------------------------

class GlmRBMLE:
    def __init__(self, d: int, link: LinkFunction, lam: float = 1.0,
                 alpha: BiasSchedule | None = None, eta: EtaSchedule | None = None):
        self.state = GlmPolicyState(d, lam, link)
        self.alpha = alpha or BiasSchedule()
        self.eta = eta or EtaSchedule()

    def select(self, contexts, t):
        return select_arm_glm(self.state, contexts, self.alpha(t), self.eta(t))

    def update(self, x, r):
        self.state.append(x, r)


class UCBGLM:
    """Round-robin for the first ``tau`` rounds, then the optimistic GLM index."""

    def __init__(self, d: int, K: int, T: int, link: LinkFunction, lam: float = 1.0,
                 delta: float = 0.1, sigma: float = 1.0, tau: int | None = None, chi: float | None = None):
        self.state = GlmPolicyState(d, lam, link)
        self.ridge = RidgeState(d, lam)
        self.K = K
        self.tau = K if tau is None else int(tau)
        self.chi = ucb_glm_chi(sigma, link.kappa_mu, d, T, delta) if chi is None else float(chi)

    def select(self, contexts, t):
        if t <= self.tau:
            return (t - 1) % self.K
        theta_hat = glm_mle(self.state)
        return int(np.argmax(ucb_glm_index(theta_hat, self.ridge.Vinv, contexts, self.chi)))

    def update(self, x, r):
        self.state.append(x, r)
        self.ridge.update(x, r)
