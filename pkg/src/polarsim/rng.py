"""Seedable, platform-stable random streams.

Trials draw from xoshiro256** seeded through SplitMix64. Per-trial seeds come
from an avalanche mix of (base_seed, cell_index, trial_index), so a trial's
stream never depends on which other cells exist in a sweep.

The compiled kernel carries its own copy of these generators; both must
produce identical sequences.
"""

from __future__ import annotations

GENERATOR_NAME = "xoshiro256** (SplitMix64 seeding)"

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_TWO_M53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(base_seed: int, cell_index: int, trial_index: int) -> int:
    h = mix64(trial_index + _GAMMA)
    h = mix64(h ^ ((cell_index * 0xD1B54A32D192ED03) & MASK64))
    return mix64(h ^ (base_seed & MASK64))


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** (Blackman & Vigna)."""

    __slots__ = ("s",)

    def __init__(self, seed: int):
        s = []
        x = seed & MASK64
        for _ in range(4):
            x = (x + _GAMMA) & MASK64
            s.append(mix64(x))
        self.s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_M53

    def open_random(self) -> float:
        """Uniform on the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_M53

    def getstate(self) -> tuple[int, int, int, int]:
        return tuple(self.s)

    def setstate(self, state) -> None:
        self.s = [int(v) & MASK64 for v in state]
