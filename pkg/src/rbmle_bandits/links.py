"""Link functions: mean map, derivative and log-partition antiderivative.

The logistic link is used in its clamped form: inside ``[-S, S]`` it is the
ordinary sigmoid, outside it continues along the tangent line at ``+-S``.
That keeps the derivative bounded below by ``sigmoid'(S)`` on the whole real
line, which is what makes the biased GLM objective strongly concave.  Since
``|theta*^T x| <= 1`` for unit contexts, the default ``S = 1`` never changes
the true reward means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("identity", "logistic")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softplus(z):
    return np.logaddexp(0.0, z)


@dataclass(frozen=True)
class LinkFunction:
    kind: str = "identity"
    clamp_radius: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}; expected one of {KINDS}")
        if not self.clamp_radius > 0:
            raise ValueError("clamp_radius must be positive")

    @property
    def L_mu(self) -> float:
        """Supremum of the derivative."""
        if self.kind == "identity":
            return 1.0
        return 0.25

    @property
    def kappa_mu(self) -> float:
        """Infimum of the derivative (attained at the clamp edges)."""
        if self.kind == "identity":
            return 1.0
        s = _sigmoid(self.clamp_radius)
        return float(s * (1.0 - s))

    def mean(self, z):
        """mu(z); accepts scalars or arrays."""
        if self.kind == "identity":
            return z * 1.0 if np.ndim(z) else float(z)
        S = self.clamp_radius
        zc = np.clip(z, -S, S)
        out = _sigmoid(zc)
        ds = _sigmoid(S) * (1.0 - _sigmoid(S))
        out = out + ds * (z - zc)
        return out if np.ndim(out) else float(out)

    def deriv(self, z):
        if self.kind == "identity":
            return np.ones_like(z, dtype=np.float64) if np.ndim(z) else 1.0
        S = self.clamp_radius
        s = _sigmoid(np.clip(z, -S, S))
        out = s * (1.0 - s)
        return out if np.ndim(out) else float(out)

    def antideriv(self, z):
        """b(z) with b' = mu everywhere (quadratic continuation past the clamp)."""
        if self.kind == "identity":
            out = 0.5 * np.square(z)
            return out if np.ndim(out) else float(out)
        S = self.clamp_radius
        zc = np.clip(z, -S, S)
        dz = z - zc
        out = _softplus(zc) + _sigmoid(zc) * dz + 0.5 * self.kappa_mu * np.square(dz)
        return out if np.ndim(out) else float(out)


IDENTITY = LinkFunction("identity")
LOGISTIC = LinkFunction("logistic", 1.0)


def link_from_name(name: str, clamp_radius: float = 1.0) -> LinkFunction:
    return LinkFunction(name, clamp_radius)
