"""Seeded PRNG used for every stochastic choice in the pipeline.

xoshiro256** with splitmix64 state initialization, fixed 64-bit constants.
Pinning the generator (rather than deferring to a platform default) keeps
subsample selections and k-means++ seeding reproducible across runs and
across independent implementations of the same pipeline.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """Deterministic 64-bit generator; one instance per seeded operation."""

    def __init__(self, seed: int):
        sm = seed & _MASK64
        s = []
        for _ in range(4):
            sm, out = _splitmix64(sm)
            s.append(out)
        if not any(s):  # all-zero state is the one forbidden state
            s[0] = 1
        self._s = s

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            v = self.next_uint64()
            if v < limit:
                return v % n

    def sample_indices(self, n: int, m: int) -> list[int]:
        """m distinct indices from range(n), returned in ascending order.

        Partial Fisher-Yates over an index table; the sorted return order
        lets callers take a subsequence of the original rows.
        """
        if not 0 <= m <= n:
            raise ValueError(f"cannot sample {m} from {n}")
        table = list(range(n))
        for i in range(m):
            j = i + self.randbelow(n - i)
            table[i], table[j] = table[j], table[i]
        return sorted(table[:m])

    def weighted_index(self, cumulative_weights) -> int:
        """Index drawn with probability proportional to the weight increments.

        `cumulative_weights` is a non-decreasing sequence ending at the total.
        """
        total = cumulative_weights[-1]
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        r = self.random() * total
        lo, hi = 0, len(cumulative_weights) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cumulative_weights[mid] <= r:
                lo = mid + 1
            else:
                hi = mid
        return lo
