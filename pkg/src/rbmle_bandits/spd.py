"""Symmetric positive definite helpers shared by every policy.

Everything here works on float64 numpy arrays.  The rank-one update keeps
``V^{-1}`` current in O(d^2) per pull; :class:`RidgeState` wraps the usual
ridge-regression bookkeeping (``V = X^T X + lambda I``, ``b = X^T r``) and
periodically refactors ``V`` so that round-off from tens of thousands of
Sherman-Morrison steps cannot accumulate.
"""

from __future__ import annotations

import numpy as np

SYMMETRY_TOL = 1e-10


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix that must be SPD fails Cholesky factorization."""


def check_spd(m: np.ndarray) -> np.ndarray:
    """Return the lower Cholesky factor of ``m`` or raise."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotPositiveDefiniteError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise NotPositiveDefiniteError("matrix is not symmetric")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def spd_inverse(m: np.ndarray) -> np.ndarray:
    """Invert an SPD matrix through its Cholesky factor.

    The result is symmetrized so later quadratic forms see an exactly
    symmetric matrix.
    """
    chol = check_spd(m)
    d = chol.shape[0]
    linv = np.linalg.solve(chol, np.eye(d))
    inv = linv.T @ linv
    return 0.5 * (inv + inv.T)


def rank_one_inverse_update(minv: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``(M + x x^T)^{-1}`` given ``minv = M^{-1}`` (Sherman-Morrison)."""
    mx = minv @ x
    denom = 1.0 + x @ mx
    return minv - np.outer(mx, mx) / denom


def quad_form(minv: np.ndarray, x: np.ndarray) -> float:
    """``x^T minv x``."""
    x = np.asarray(x, dtype=np.float64)
    return float(x @ minv @ x)


def quad_forms(minv: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Row-wise ``x_i^T minv x_i`` for a (K, d) block of vectors."""
    return np.einsum("ij,ij->i", xs @ minv, xs)


class RidgeState:
    """Online ridge regression: ``V``, ``V^{-1}``, ``b`` and ``theta_hat``.

    ``refresh_every`` controls how often ``V^{-1}`` is recomputed from ``V``
    by a full factorization; between refreshes it is advanced by
    :func:`rank_one_inverse_update`.
    """

    def __init__(self, d: int, lam: float = 1.0, refresh_every: int = 1000):
        if d < 1:
            raise ValueError("d must be positive")
        if lam <= 0:
            raise ValueError("lambda must be positive")
        self.d = d
        self.lam = float(lam)
        self.refresh_every = int(refresh_every)
        self.V = lam * np.eye(d)
        self.Vinv = np.eye(d) / lam
        self.b = np.zeros(d)
        self.theta_hat = np.zeros(d)
        self.n_updates = 0

    def update(self, x: np.ndarray, r: float) -> None:
        x = np.asarray(x, dtype=np.float64)
        self.V += np.outer(x, x)
        self.b += r * x
        self.n_updates += 1
        if self.refresh_every > 0 and self.n_updates % self.refresh_every == 0:
            self.Vinv = spd_inverse(self.V)
        else:
            self.Vinv = rank_one_inverse_update(self.Vinv, x)
        self.theta_hat = self.Vinv @ self.b
