"""Portable deterministic random numbers (splitmix64).

The art generator reseeds every frame and must produce bit-identical
variate streams on every platform, so the host RNG is off the table.
Splitmix64 is tiny, published, and has no state beyond one 64-bit word.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream; `uniform()` yields doubles in [0, 1)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        # 53 high bits -> double in [0, 1), the usual dyadic construction.
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u
