"""Deterministic, splittable 64-bit PRNG (splitmix64).

The generator is specified bit-exactly so tests and oracles can recompute
any draw independently:

* state update: ``state = (state + 0x9E3779B97F4A7C15) mod 2**64``
* output mix:   ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;``
                ``z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31``
  (all arithmetic mod 2**64, applied to the updated state)
* ``next_bool()``  is the top bit of ``next_u64()``
* ``next_float()`` is ``(next_u64() >> 11) * 2.0**-53`` in ``[0, 1)``
* ``uniform(a,b)`` is ``a + (b - a) * next_float()``
* ``split()``      seeds a child generator with ``next_u64()``

Draw order matters: every call advances the state exactly once.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_bool(self) -> bool:
        return bool(self.next_u64() >> 63)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_float()

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())

    def __repr__(self) -> str:
        return f"SplitMix64(state=0x{self._state:016x})"
