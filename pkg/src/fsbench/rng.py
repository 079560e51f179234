"""Deterministic pseudo-random primitives for episode sampling.

The generator pipeline is fixed so that episode composition is a pure
function of (base_seed, episode_index) and can be reproduced exactly by
an independent implementation:

1. ``derive_seed`` maps (base_seed, episode_index) to one 64-bit seed
   with the splitmix64 finalizer.
2. That seed initializes a xoshiro256** stream (state expanded through
   splitmix64, as the generator's authors recommend).
3. Bounded draws use rejection sampling on the raw 64-bit output, and
   subsets are taken with a partial Fisher-Yates shuffle.

All arithmetic is modulo 2**64.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ValidationError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 golden-ratio stream increment


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def splitmix64(state: int) -> int:
    """First output of a splitmix64 stream started at ``state``."""
    return _mix64((state + _GAMMA) & _MASK64)


def derive_seed(base_seed: int, episode_index: int) -> int:
    """Derive the per-episode seed for one episode of a run.

    Computed as the splitmix64 finalizer of
    ``base_seed XOR (episode_index * 0x9E3779B97F4A7C15)``, which places
    consecutive episode indices at well-separated stream positions while
    keeping the derivation trivial to reimplement.
    """
    if not 0 <= base_seed <= _MASK64:
        raise ValidationError("base_seed must be an unsigned 64-bit integer")
    if episode_index < 0:
        raise ValidationError("episode_index must be non-negative")
    return splitmix64(base_seed ^ ((episode_index * _GAMMA) & _MASK64))


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator following the reference update rule."""

    __slots__ = ("_s",)

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= _MASK64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        s = seed
        state = []
        for _ in range(4):
            s = (s + _GAMMA) & _MASK64
            state.append(_mix64(s))
        if not any(state):
            state[0] = _GAMMA  # the all-zero state is invalid
        self._s = state

    @classmethod
    def from_state(cls, state: Sequence[int]) -> "Xoshiro256StarStar":
        """Build a generator from four explicit state words (test hook)."""
        if len(state) != 4 or not any(w & _MASK64 for w in state):
            raise ValidationError("state must be four words, not all zero")
        gen = cls.__new__(cls)
        gen._s = [w & _MASK64 for w in state]
        return gen

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling.

        Draws are rejected above the largest multiple of n that fits in
        64 bits, so the result is exactly uniform.
        """
        if n <= 0:
            raise ValidationError("randbelow requires n >= 1")
        threshold = ((1 << 64) // n) * n
        x = self.next_u64()
        while x >= threshold:
            x = self.next_u64()
        return x % n

    def sample(self, population: Sequence[int], k: int) -> list:
        """Choose k distinct elements via a partial Fisher-Yates shuffle.

        Consumes exactly one bounded draw per selected element (plus any
        rejection redraws). Selection order is the shuffle order; callers
        that need a canonical order must sort the result.
        """
        n = len(population)
        if not 0 <= k <= n:
            raise ValidationError(f"cannot sample {k} items from {n}")
        items = list(population)
        for i in range(k):
            j = i + self.randbelow(n - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
