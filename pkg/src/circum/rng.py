"""Seeded pseudo-random numbers with a pinned, portable update rule.

Backward-orbit sampling must be bit-reproducible across platforms and
releases, so the generator is written out here instead of delegating to a
library default whose stream could change.  The core is xorshift64*:

    x ^= x >> 12
    x ^= (x << 25) mod 2^64
    x ^= x >> 27
    output = (x * 2685821657736338717) mod 2^64

Seeding passes the user seed through one splitmix64 scramble,

    s = (seed + 9E3779B97F4A7C15) mod 2^64
    s = ((s ^ (s >> 30)) * BF58476D1CE4E5B9) mod 2^64
    s = ((s ^ (s >> 27)) * 94D049BB133111EB) mod 2^64
    state = s ^ (s >> 31)

so that small seeds (0, 1, 2, ...) land on well-separated states.  A zero
state would be a fixed point of xorshift and is replaced by the splitmix
increment constant.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_MULT = 2685821657736338717
_SPLITMIX_INC = 0x9E3779B97F4A7C15


def _splitmix64(seed: int) -> int:
    s = (seed + _SPLITMIX_INC) & _MASK
    s = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    s = ((s ^ (s >> 27)) * 0x94D049BB133111EB) & _MASK
    return s ^ (s >> 31)


class Xorshift:
    """xorshift64* stream for a given integer seed."""

    def __init__(self, seed: int):
        self.state = _splitmix64(int(seed) & _MASK)
        if self.state == 0:
            self.state = _SPLITMIX_INC

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & _MASK

    def uniform(self) -> float:
        # top 53 bits give a uniform dyadic rational in [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice_index(self, n: int) -> int:
        """Index into a sequence of length n, uniform up to 2^-53 floor bias."""
        if n <= 0:
            raise ValueError("choice_index needs n >= 1")
        k = int(self.uniform() * n)
        return n - 1 if k >= n else k
