"""Deterministic pseudo-random number generation.

All randomness in this package flows through xoshiro256** seeded via
splitmix64, so identical seeds produce bit-identical streams on every
platform and in every implementation that follows the same recipe.
"""

from __future__ import annotations

import math

_MASK64 = 0xFFFFFFFFFFFFFFFF
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 2.0 ** -53


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (output, new_state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64, state


def derive_seed(seed: int, stream: int) -> int:
    """Deterministic sub-seed: the (stream+1)-th splitmix64 output of `seed`.

    splitmix64's state walk is affine (state_k = seed + k*gamma mod 2^64),
    so the (stream+1)-th output is computed in O(1) by jumping straight to
    that state and mixing once.

    Used wherever one user-facing seed has to fan out into independent
    streams (per-record generation, per-episode resets, per-message chat).
    """
    jumped = (seed + stream * 0x9E3779B97F4A7C15) & _MASK64
    out, _ = splitmix64_next(jumped)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** (Blackman/Vigna), state seeded from splitmix64."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        state = seed & _MASK64
        self._s0, state = splitmix64_next(state)
        self._s1, state = splitmix64_next(state)
        self._s2, state = splitmix64_next(state)
        self._s3, state = splitmix64_next(state)

    def next_uint64(self) -> int:
        s1 = self._s1
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 = self._s2 ^ self._s0
        s3 = self._s3 ^ s1
        self._s1 = s1 ^ s2
        self._s0 = self._s0 ^ s3
        self._s2 = s2 ^ t
        self._s3 = _rotl(s3, 45)
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * _INV_2_53

    def uniform_range(self, low: float, high: float) -> float:
        return low + (high - low) * self.uniform()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randrange requires n >= 1")
        idx = int(self.uniform() * n)
        return n - 1 if idx >= n else idx

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def normal_pair(self) -> tuple[float, float]:
        """Two independent standard normals via Box-Muller.

        Consumes exactly two uniforms. log(1-u1) keeps the argument in
        (0, 1], so no domain error is possible.
        """
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        theta = _TWO_PI * u2
        return r * math.cos(theta), r * math.sin(theta)

    def normals(self, n: int) -> list[float]:
        """n standard normals, drawn in pairs; a trailing odd draw discards
        the second member of its pair."""
        out: list[float] = []
        while len(out) < n:
            z0, z1 = self.normal_pair()
            out.append(z0)
            if len(out) < n:
                out.append(z1)
        return out
