"""Portable deterministic randomness for the greedy triangular stage.

xoshiro256** seeded through splitmix64, so identical seeds give identical
permutations on every platform and Python build.  The shuffle uses unbiased
rejection sampling rather than modulo.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** 1.0 (Blackman & Vigna), state expanded from a 64-bit seed."""

    def __init__(self, seed: int):
        self._s = []
        z = seed & MASK64
        for _ in range(4):
            # splitmix64 step
            z = (z + 0x9E3779B97F4A7C15) & MASK64
            t = z
            t = ((t ^ (t >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            t = ((t ^ (t >> 27)) * 0x94D049BB133111EB) & MASK64
            self._s.append(t ^ (t >> 31))
        if all(s == 0 for s in self._s):
            self._s[0] = 1

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates permutation."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
