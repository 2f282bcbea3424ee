"""Leveled BGV-style scheme: RLWE keys, slot-packed plaintexts, additions,
relinearized multiplications, and modulus switching.

Messages live in the low-order residue mod t; encryption noise is scaled
by t, so decryption is (c0 + c1*s [+ c2*s^2]) mod Q, centered, then mod t.
Ring multiplication runs through one negacyclic NTT per active chain
prime and recombines by CRT.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

from petward import PetwardError
from petward.he.ntt import get_ntt
from petward.he.params import HeParams
from petward.numutil import centered, modinv

RELIN_DIGIT_BITS = 16
_RELIN_BASE = 1 << RELIN_DIGIT_BITS


class HeRangeError(PetwardError):
    pass


class LevelMismatchError(PetwardError):
    pass


class DepthExhaustedError(PetwardError):
    pass


@dataclass(frozen=True)
class Plaintext:
    """Polynomial with coefficients mod t; the slot view is its NTT image."""

    coeffs: tuple[int, ...]
    t: int


@dataclass(frozen=True)
class Ciphertext:
    parts: tuple[tuple[int, ...], ...]  # 2 fresh, 3 after an unrelinearized product
    level: int
    params: HeParams

    @property
    def degree(self) -> int:
        return len(self.parts)

    @property
    def is_fresh_degree(self) -> bool:
        return self.degree == 2


@dataclass(frozen=True)
class KeySet:
    secret: tuple[int, ...]  # ternary ring element
    public: tuple[tuple[int, ...], tuple[int, ...]]
    relin: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    params: HeParams


class _LevelContext:
    """CRT and NTT plumbing for the active primes of one level."""

    def __init__(self, params: HeParams, level: int):
        self.primes = params.chain[: level + 1]
        self.q = params.modulus_at(level)
        self.n = params.n
        self._ntts = [get_ntt(params.n, p) for p in self.primes]
        self._crt_weights = []
        for p in self.primes:
            q_over_p = self.q // p
            self._crt_weights.append(q_over_p * modinv(q_over_p % p, p))

    def mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        residues = []
        for ntt in self._ntts:
            residues.append(ntt.multiply([x % ntt.p for x in a], [x % ntt.p for x in b]))
        out = []
        for i in range(self.n):
            acc = 0
            for weight, res in zip(self._crt_weights, residues):
                acc += weight * res[i]
            out.append(acc % self.q)
        return tuple(out)

    def add(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def sub(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((x - y) % self.q for x, y in zip(a, b))

    def scale(self, a: tuple[int, ...], c: int) -> tuple[int, ...]:
        return tuple(x * c % self.q for x in a)


@lru_cache(maxsize=256)
def _ctx(params: HeParams, level: int) -> _LevelContext:
    return _LevelContext(params, level)


def _gauss_poly(params: HeParams, rng: random.Random) -> list[int]:
    return [round(rng.gauss(0.0, params.error_std)) for _ in range(params.n)]


def _ternary_poly(params: HeParams, rng: random.Random) -> list[int]:
    return [rng.randrange(3) - 1 for _ in range(params.n)]


def keygen(params: HeParams, seed: int) -> KeySet:
    """Deterministic key generation: secret, RLWE public key, and the
    base-2^16 decomposition relinearization key."""
    rng = random.Random(seed)
    ctx = _ctx(params, params.levels)
    q = ctx.q
    secret = tuple(_ternary_poly(params, rng))
    a = tuple(rng.randrange(q) for _ in range(params.n))
    e = _gauss_poly(params, rng)
    p0 = tuple(
        (-(asi + params.t * ei)) % q
        for asi, ei in zip(ctx.mul(a, secret), e)
    )
    secret_sq = ctx.mul(secret, secret)
    digits = -(-q.bit_length() // RELIN_DIGIT_BITS)
    relin = []
    power = 1
    for _ in range(digits):
        aj = tuple(rng.randrange(q) for _ in range(params.n))
        ej = _gauss_poly(params, rng)
        bj = tuple(
            (-(asi + params.t * ei) + power * s2i) % q
            for asi, ei, s2i in zip(ctx.mul(aj, secret), ej, secret_sq)
        )
        relin.append((bj, aj))
        power = power * _RELIN_BASE
    return KeySet(secret=secret, public=(p0, a), relin=tuple(relin), params=params)


def encode(values: list[int], params: HeParams) -> Plaintext:
    """Pack up to n residues mod t into slots; missing slots are zero."""
    if len(values) > params.n:
        raise HeRangeError(f"{len(values)} values exceed {params.n} slots")
    for v in values:
        if not 0 <= v < params.t:
            raise HeRangeError(f"slot value {v} outside [0, {params.t})")
    slots = list(values) + [0] * (params.n - len(values))
    coeffs = get_ntt(params.n, params.t).inverse(slots)
    return Plaintext(tuple(coeffs), params.t)


def decode(pt: Plaintext, params: HeParams) -> list[int]:
    return get_ntt(params.n, params.t).forward(list(pt.coeffs))


def encrypt(
    keys: KeySet,
    pt: Plaintext,
    rng: random.Random,
    noiseless: bool = False,
) -> Ciphertext:
    """Encrypt under the public key at the top level.

    ``noiseless`` zeroes u, e0, e1 (diagnostic hook for noise-budget
    tests; never used on real data).
    """
    params = keys.params
    if pt.t != params.t:
        raise HeRangeError("plaintext modulus does not match parameters")
    level = params.levels
    ctx = _ctx(params, level)
    q = ctx.q
    p0, p1 = keys.public
    if noiseless:
        u = [0] * params.n
        e0 = e1 = [0] * params.n
    else:
        u = _ternary_poly(params, rng)
        e0 = _gauss_poly(params, rng)
        e1 = _gauss_poly(params, rng)
    c0 = tuple(
        (p0u + params.t * e + m) % q
        for p0u, e, m in zip(ctx.mul(p0, tuple(u)), e0, pt.coeffs)
    )
    c1 = tuple(
        (p1u + params.t * e) % q for p1u, e in zip(ctx.mul(p1, tuple(u)), e1)
    )
    return Ciphertext(parts=(c0, c1), level=level, params=params)


def _inner_product_with_key(keys: KeySet, ct: Ciphertext) -> list[int]:
    """c0 + c1*s (+ c2*s^2) mod Q at the ciphertext's level, centered."""
    ctx = _ctx(ct.params, ct.level)
    acc = list(ct.parts[0])
    acc = list(ctx.add(tuple(acc), ctx.mul(ct.parts[1], keys.secret)))
    if ct.degree == 3:
        s2 = ctx.mul(keys.secret, keys.secret)
        acc = list(ctx.add(tuple(acc), ctx.mul(ct.parts[2], s2)))
    return [centered(x, ctx.q) for x in acc]


def decrypt(keys: KeySet, ct: Ciphertext) -> Plaintext:
    v = _inner_product_with_key(keys, ct)
    return Plaintext(tuple(x % keys.params.t for x in v), keys.params.t)


def noise_budget(keys: KeySet, ct: Ciphertext) -> float:
    """Bits of headroom: log2(q_level) - log2(2 * ||noise||_inf).

    Zero or negative predicts decryption failure. The norm is clamped at
    1 so a perfectly noiseless ciphertext reports log2(q) - 1.
    """
    v = _inner_product_with_key(keys, ct)
    norm = max(1, max(abs(x) for x in v))
    q = ct.params.modulus_at(ct.level)
    return math.log2(q) - math.log2(2 * norm)


def _require_same_level(a: Ciphertext, b: Ciphertext) -> None:
    if a.params is not b.params and a.params != b.params:
        raise LevelMismatchError("ciphertexts use different parameters")
    if a.level != b.level:
        raise LevelMismatchError(
            f"level mismatch {a.level} vs {b.level}; mod_switch the higher one first"
        )


def he_add(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    _require_same_level(a, b)
    ctx = _ctx(a.params, a.level)
    degree = max(a.degree, b.degree)
    zero = tuple([0] * a.params.n)
    parts = []
    for i in range(degree):
        pa = a.parts[i] if i < a.degree else zero
        pb = b.parts[i] if i < b.degree else zero
        parts.append(ctx.add(pa, pb))
    return Ciphertext(parts=tuple(parts), level=a.level, params=a.params)


def he_mul(a: Ciphertext, b: Ciphertext, keys: KeySet) -> Ciphertext:
    """Slot-wise product: tensor, relinearize back to degree 2, then
    switch down one level. Requires a level to spend."""
    _require_same_level(a, b)
    if a.level == 0:
        raise DepthExhaustedError("already at the bottom level; no multiplications left")
    if a.degree != 2 or b.degree != 2:
        raise LevelMismatchError("relinearize operands before multiplying again")
    ctx = _ctx(a.params, a.level)
    d0 = ctx.mul(a.parts[0], b.parts[0])
    d1 = ctx.add(ctx.mul(a.parts[0], b.parts[1]), ctx.mul(a.parts[1], b.parts[0]))
    d2 = ctx.mul(a.parts[1], b.parts[1])
    c0, c1 = _relinearize(d0, d1, d2, keys, a.level)
    return mod_switch(Ciphertext(parts=(c0, c1), level=a.level, params=a.params))


def _relinearize(d0, d1, d2, keys: KeySet, level: int):
    ctx = _ctx(keys.params, level)
    digits = -(-ctx.q.bit_length() // RELIN_DIGIT_BITS)
    c0, c1 = list(d0), list(d1)
    remaining = list(d2)
    for j in range(digits):
        digit = tuple(x & (_RELIN_BASE - 1) for x in remaining)
        remaining = [x >> RELIN_DIGIT_BITS for x in remaining]
        bj, aj = keys.relin[j]
        bj = tuple(x % ctx.q for x in bj)
        aj = tuple(x % ctx.q for x in aj)
        c0 = list(ctx.add(tuple(c0), ctx.mul(digit, bj)))
        c1 = list(ctx.add(tuple(c1), ctx.mul(digit, aj)))
    return tuple(c0), tuple(c1)


def mod_switch(ct: Ciphertext) -> Ciphertext:
    """Drop the top active prime, rescaling so decryption mod t is unchanged.

    For a dropped prime q_hat with q_hat != 1 (mod t) the plain rescale
    would divide the message by q_hat mod t, so the ciphertext is first
    multiplied by centered(q_hat mod t) (a no-op for well-chosen chains);
    the subtracted correction delta is built divisible by t.
    """
    if ct.level == 0:
        raise DepthExhaustedError("already at the bottom level; cannot switch further")
    params = ct.params
    ctx = _ctx(params, ct.level)
    q_hat = params.chain[ct.level]
    next_q = params.modulus_at(ct.level - 1)
    factor = centered(q_hat % params.t, params.t)
    t_inv = modinv(params.t % q_hat, q_hat)
    new_parts = []
    for part in ct.parts:
        scaled = ctx.scale(part, factor) if factor != 1 else part
        out = []
        for x in scaled:
            x = centered(x, ctx.q)
            w = centered(x % q_hat * t_inv % q_hat, q_hat)
            out.append((x - params.t * w) // q_hat % next_q)
        new_parts.append(tuple(out))
    return Ciphertext(parts=tuple(new_parts), level=ct.level - 1, params=params)
