"""Bias schedule alpha(t) and GLM score multiplier eta(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class BiasSchedule:
    """alpha(t) for 1-based rounds.

    ``kind="sqrt"`` gives ``sqrt(t)``.  ``kind="table"`` reads ``values[t-1]``
    and holds the last entry beyond the end of the table.
    """

    kind: str = "sqrt"
    values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("sqrt", "table"):
            raise ValueError(f"unknown bias schedule {self.kind!r}")
        if self.kind == "table":
            vals = tuple(float(v) for v in self.values)
            if not vals or min(vals) <= 0:
                raise ValueError("bias table must be non-empty and positive")
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise ValueError("bias table must be nondecreasing")
            object.__setattr__(self, "values", vals)

    def __call__(self, t: int) -> float:
        if self.kind == "sqrt":
            return math.sqrt(t)
        return self.values[min(t, len(self.values)) - 1]

    @classmethod
    def from_dict(cls, raw: dict | None) -> "BiasSchedule":
        raw = dict(raw or {"kind": "sqrt"})
        return cls(raw.get("kind", "sqrt"), tuple(raw.get("values", ())))


@dataclass(frozen=True)
class EtaSchedule:
    """eta(t): ``1 + scale * log t`` (default scale 1)."""

    kind: str = "one_plus_log"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind != "one_plus_log":
            raise ValueError(f"unknown eta schedule {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("eta scale must be positive")

    def __call__(self, t: int) -> float:
        return 1.0 + self.scale * math.log(t)

    @classmethod
    def from_dict(cls, raw: dict | None) -> "EtaSchedule":
        raw = dict(raw or {})
        return cls(raw.get("kind", "one_plus_log"), float(raw.get("scale", 1.0)))
