"""Leveled encryption parameters and their validation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from math import gcd, prod

from petward import PetwardError
from petward.numutil import is_prime

DEFAULT_ERROR_STD = 3.2


class HeParameterError(PetwardError):
    pass


@dataclass(frozen=True)
class HeParams:
    """Ring degree n, plaintext modulus t, and the modulus chain.

    Level l uses modulus prod(chain[: l + 1]); fresh ciphertexts live at
    the top level (len(chain) - 1) and each multiplication consumes one
    level. The congruences t = 1 (mod 2n) and q = 1 (mod 2n) are what
    make n-slot packing and the negacyclic NTT possible.
    """

    n: int
    t: int
    chain: tuple[int, ...]
    error_std: float = DEFAULT_ERROR_STD
    security_note: str = ""

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise HeParameterError(f"ring degree {self.n} is not a power of two >= 2")
        two_n = 2 * self.n
        if self.t % two_n != 1:
            raise HeParameterError(f"t={self.t} violates t = 1 (mod {two_n})")
        if not is_prime(self.t):
            raise HeParameterError(f"plaintext modulus t={self.t} is not prime")
        if not self.chain:
            raise HeParameterError("modulus chain is empty")
        if len(set(self.chain)) != len(self.chain):
            raise HeParameterError("modulus chain primes must be distinct")
        for q in self.chain:
            if not is_prime(q):
                raise HeParameterError(f"chain modulus {q} is not prime")
            if q % two_n != 1:
                raise HeParameterError(f"chain modulus {q} violates q = 1 (mod {two_n})")
            if gcd(self.t, q) != 1:
                raise HeParameterError(f"gcd(t={self.t}, q={q}) != 1")
        if self.error_std <= 0:
            raise HeParameterError(f"error std must be positive, got {self.error_std}")

    @property
    def levels(self) -> int:
        """Multiplicative depth budget L = chain length - 1."""
        return len(self.chain) - 1

    def modulus_at(self, level: int) -> int:
        if not 0 <= level <= self.levels:
            raise HeParameterError(f"level {level} outside 0..{self.levels}")
        return prod(self.chain[: level + 1])

    @cached_property
    def params_hash(self) -> bytes:
        material = f"{self.n}|{self.t}|{','.join(map(str, self.chain))}|{self.error_std}"
        return hashlib.sha256(material.encode()).digest()[:8]

    def describe(self) -> dict:
        top = self.modulus_at(self.levels)
        return {
            "ring_degree": self.n,
            "plaintext_modulus": self.t,
            "chain_primes": list(self.chain),
            "levels": self.levels,
            "total_modulus_bits": top.bit_length(),
            "error_std": self.error_std,
            "security_note": self.security_note,
        }
