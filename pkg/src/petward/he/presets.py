"""Named parameter sets.

All presets are for desk-scale demonstration and benchmarking; none of
them provide cryptographic security (the toy ring degrees make lattice
attacks trivial), and each carries an explicit note saying so.
"""

from __future__ import annotations

from functools import lru_cache

from petward import PetwardError
from petward.he.params import HeParams
from petward.numutil import next_prime_congruent

NOT_SECURE_NOTE = (
    "NOT SECURE: demonstration parameters only; the ring degree is far too "
    "small for any real security level"
)


def _chain(two_n: int, count: int, bits: int = 61) -> tuple[int, ...]:
    primes: list[int] = []
    candidate = 1 << bits
    while len(primes) < count:
        p = next_prime_congruent(candidate, two_n)
        primes.append(p)
        candidate = p + two_n
    return tuple(primes)


@lru_cache(maxsize=None)
def get_preset(name: str) -> HeParams:
    if name == "desk":
        # toy default: 16 slots, t = 97, three ~61-bit primes
        return HeParams(n=16, t=97, chain=_chain(32, 3), security_note=NOT_SECURE_NOTE)
    if name == "desk-wide":
        # same ring, plaintext modulus ~2^31 so fixed-point vitals sums
        # never wrap mod t during aggregation
        t = next_prime_congruent(1 << 31, 32)
        return HeParams(n=16, t=t, chain=_chain(32, 3), security_note=NOT_SECURE_NOTE)
    if name == "demo-large":
        t = next_prime_congruent(1 << 16, 8192)
        return HeParams(n=4096, t=t, chain=_chain(8192, 3), security_note=NOT_SECURE_NOTE)
    raise PetwardError(f"unknown parameter preset {name!r}; choose desk, desk-wide, or demo-large")


PRESET_NAMES = ("desk", "desk-wide", "demo-large")
