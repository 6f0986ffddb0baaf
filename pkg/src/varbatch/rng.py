"""Portable seeded randomness.

Every shuffle in the planner draws from a SplitMix64 stream whose state is
derived from ``(seed, purpose, epoch)`` with BLAKE2b, so streams for
different purposes and epochs are independent and the output does not
depend on platform, Python version or numpy version.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from typing import MutableSequence

MASK64 = (1 << 64) - 1
MAX_SEED = 1 << 64


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014)."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` without modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (MAX_SEED - n) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def shuffle(self, items: MutableSequence) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def check_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return seed


@lru_cache(maxsize=4096)
def _stream_state(seed: int, purpose: str, epoch: int) -> int:
    key = f"{check_seed(seed)}|{purpose}|{epoch}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def derive_stream(seed: int, purpose: str, epoch: int = 0) -> SplitMix64:
    """Independent generator for one (seed, purpose, epoch) triple."""
    return SplitMix64(_stream_state(seed, purpose, epoch))
