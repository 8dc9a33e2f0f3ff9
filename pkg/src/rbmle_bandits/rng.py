"""Frozen random-number contract used for datasets and randomized policies.

The byte layout of generated datasets depends on every detail below, so
none of it may change without bumping ``environment.FORMAT_VERSION``:

* Stream seeds are derived with SplitMix64::

      stream_seed(seed, index) = splitmix64((seed + GOLDEN * (index + 1)) mod 2**64)

  where ``GOLDEN = 0x9E3779B97F4A7C15``.  Nested streams apply the rule
  repeatedly (e.g. ``stream_seed(stream_seed(seed, trial), tag)``).
* Each stream is a PCG64 generator (numpy's ``PCG64`` bit generator,
  seeded with the integer stream seed).  Only ``random_raw`` output is
  consumed, never numpy's distribution methods.
* A uniform double is ``(raw >> 11) * 2**-53``, in [0, 1).
* Normals come from the basic Box-Muller transform.  Uniforms are taken
  in pairs ``(u, v)``; each pair gives
  ``sqrt(-2 ln(1 - u)) * cos(2 pi v)`` followed by
  ``sqrt(-2 ln(1 - u)) * sin(2 pi v)``.  A request for ``n`` normals
  consumes ``2 * ceil(n / 2)`` raw words; an odd trailing value is
  discarded, so there is never a cached spare between calls.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_TWO_M53 = 2.0**-53


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x`` (already advanced)."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_seed(seed: int, index: int) -> int:
    """Seed of sub-stream ``index`` of base ``seed``."""
    return splitmix64((seed + GOLDEN * (index + 1)) & MASK64)


def name_tag(name: str) -> int:
    """Stable integer tag for a string (CRC-32 of its UTF-8 bytes)."""
    return zlib.crc32(name.encode("utf-8"))


class Stream:
    """A deterministic uniform/normal source following the module contract."""

    __slots__ = ("seed", "_bits")

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bits = np.random.PCG64(self.seed)

    def raw(self, n: int) -> np.ndarray:
        return self._bits.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(angle)
        out[:, 1] = radius * np.sin(angle)
        return out.reshape(-1)[:n]

    def integers(self, n: int, high: int) -> np.ndarray:
        """``n`` draws in ``[0, high)`` (multiply-shift on a uniform)."""
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)
