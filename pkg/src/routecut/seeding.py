"""Deterministic seed derivation for nested and parallel randomness.

Every stochastic operation in this package receives an explicit generator.
Child generators are derived from a base seed plus integer stream indices
(run number, cycle, group, ...), so results never depend on scheduling
order or on how many draws another component consumed.
"""

from __future__ import annotations

import random

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    # splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive_seed(base: int, *stream: int) -> int:
    """Mix ``base`` with stream indices into a new 64-bit seed."""
    s = base & _MASK
    for x in stream:
        s = _mix((s + _GAMMA + (x & _MASK)) & _MASK)
    return _mix(s)


def make_rng(base: int, *stream: int) -> random.Random:
    """A fresh ``random.Random`` seeded from ``derive_seed(base, *stream)``."""
    return random.Random(derive_seed(base, *stream))
