"""Experiment configuration and its JSON representation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

CONTEXT_MODES = ("static", "time-varying")
LINKS = ("identity", "logistic")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class PolicySpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    K: int
    d: int
    T: int
    trials: int
    theta_star: list[float]
    context_mode: str = "static"
    link: str = "identity"
    clamp_radius: float = 1.0
    seed: int = 46
    policies: list[PolicySpec] = field(default_factory=list)
    alpha: dict[str, Any] = field(default_factory=lambda: {"kind": "sqrt"})
    eta: dict[str, Any] = field(default_factory=lambda: {"kind": "one_plus_log"})
    record_timing: bool = True
    round_stride: int = 1

    def __post_init__(self):
        self.theta_star = [float(v) for v in self.theta_star]
        self.policies = [p if isinstance(p, PolicySpec) else PolicySpec(**p) for p in self.policies]

    def validate(self, registry=None) -> "ExperimentConfig":
        for name in ("K", "d", "T", "trials", "round_stride"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value!r}")
        if self.K < 2:
            raise ConfigError("K", "need at least two arms")
        if len(self.theta_star) != self.d:
            raise ConfigError("theta_star", f"length {len(self.theta_star)} does not match d={self.d}")
        if not all(math.isfinite(v) for v in self.theta_star):
            raise ConfigError("theta_star", "entries must be finite")
        if math.sqrt(sum(v * v for v in self.theta_star)) > 1.0 + 1e-12:
            raise ConfigError("theta_star", "l2 norm must be at most 1")
        if self.context_mode not in CONTEXT_MODES:
            raise ConfigError("context_mode", f"expected one of {CONTEXT_MODES}")
        if self.link not in LINKS:
            raise ConfigError("link", f"expected one of {LINKS}")
        if not self.clamp_radius > 0:
            raise ConfigError("clamp_radius", "must be positive")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if registry is not None:
            for entry in self.policies:
                if entry.name not in registry:
                    raise ConfigError("policies", f"unknown policy {entry.name!r}")
        return self

    def data_fields(self) -> dict[str, Any]:
        """The subset of fields that determines the generated dataset."""
        return {
            "K": self.K,
            "d": self.d,
            "T": self.T,
            "trials": self.trials,
            "theta_star": self.theta_star,
            "context_mode": self.context_mode,
            "link": self.link,
            "clamp_radius": self.clamp_radius,
            "seed": self.seed,
        }

    def data_hash(self) -> str:
        return digest_json(self.data_fields())

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        return digest_json(self.to_dict())

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        missing = {"K", "d", "T", "trials", "theta_star"} - set(raw)
        if missing:
            raise ConfigError(sorted(missing)[0], "required field missing")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError("policies", str(exc)) from exc


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest_json(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    return ExperimentConfig.from_dict(raw)
