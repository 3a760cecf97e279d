"""Pinned deterministic random generator.

All synthetic randomness in the package flows from a single 64-bit seed
through SplitMix64 (Steele, Lea & Flood's mix function).  The algorithm is
fixed here on purpose: it is trivial to transcribe into any language, so
recorded runs replay identically outside Python.

Substreams are derived by hashing a text label into the parent seed
(``derive``), which keeps independent consumers independent of each other's
draw counts.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive(seed: int, label: str) -> int:
    """Child seed for a named substream; stable across runs and platforms."""
    z = seed & _MASK
    for byte in label.encode("utf-8"):
        z = _mix((z + byte + _GOLDEN) & _MASK)
    return z


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        """Uniform in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive (unbiased enough for simulation use)."""
        span = hi - lo + 1
        return lo + self.next_u64() % span

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Box-Muller from two pinned uniforms."""
        u1 = self.random()
        while u1 <= 0.0:
            u1 = self.random()
        u2 = self.random()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """Fisher-Yates, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
