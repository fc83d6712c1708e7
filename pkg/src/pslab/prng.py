"""Deterministic pseudo-randomness with named streams.

All randomness in pslab flows from a single integer seed through named
streams, so that adding trials to an experiment never perturbs earlier
trials and identical configs reproduce byte-identical outputs on every
platform. The generator is splitmix64: a counter-based 64-bit mixer with
well-studied constants, chosen over random.Random because its output is
fixed by specification rather than by CPython implementation details.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given counter state."""
    z = (state + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a stream name; stable across platforms."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


class Stream:
    """Counter-based random stream identified by (seed, name).

    Two streams with the same seed but different names are independent for
    every practical purpose; the i-th output never depends on how many
    outputs were drawn before it, only on i.
    """

    def __init__(self, seed: int, name: str = ""):
        self.seed = seed & MASK64
        self.name = name
        self._base = (self.seed ^ fnv1a64(name)) & MASK64 if name else self.seed
        self._index = 0

    def next_u64(self) -> int:
        value = splitmix64((self._base + self._index) & MASK64)
        self._index += 1
        return value

    def next_float(self) -> float:
        # 53 high bits -> uniform in [0, 1)
        return (self.next_u64() >> 11) / float(1 << 53)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; unbiased."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates shuffle; returns the same list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample_without_replacement(self, population: list, size: int) -> list:
        """Sorted uniform sample of `size` distinct elements."""
        if size > len(population):
            raise ValueError("sample size exceeds population")
        pool = list(population)
        # partial Fisher-Yates: first `size` slots become the sample
        for i in range(size):
            j = i + self.next_below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:size])


def bulk_u64(seed: int, name: str, count: int, offset: int = 0) -> np.ndarray:
    """Vectorised slice of a stream: outputs offset .. offset+count-1.

    Matches Stream(seed, name).next_u64() call-for-call, so scalar and bulk
    consumers of the same stream see identical values.
    """
    base = (seed & MASK64) ^ fnv1a64(name) if name else seed & MASK64
    state = np.arange(offset, offset + count, dtype=np.uint64)
    z = state + np.uint64((base + _GOLDEN) & MASK64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def bulk_floats(seed: int, name: str, count: int, offset: int = 0) -> np.ndarray:
    """Vectorised uniform [0, 1) floats; same values as Stream.next_float."""
    return (bulk_u64(seed, name, count, offset) >> np.uint64(11)) / float(1 << 53)
