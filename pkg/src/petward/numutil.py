"""Shared modular arithmetic helpers."""

from __future__ import annotations

# Deterministic Miller-Rabin witness set, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_congruent(start: int, modulus: int, residue: int = 1) -> int:
    """Smallest prime >= start with prime % modulus == residue."""
    candidate = start + (residue - start) % modulus
    while not is_prime(candidate):
        candidate += modulus
    return candidate


def modinv(a: int, m: int) -> int:
    return pow(a, -1, m)


def centered(x: int, q: int) -> int:
    """Representative of x mod q in (-q/2, q/2]."""
    x %= q
    if x > q // 2:
        x -= q
    return x


def find_root_of_unity(order: int, p: int) -> int:
    """A primitive order-th root of unity mod prime p (order | p-1)."""
    if (p - 1) % order:
        raise ValueError(f"{order} does not divide {p} - 1")
    cofactor = (p - 1) // order
    for g in range(2, p):
        root = pow(g, cofactor, p)
        if pow(root, order // 2, p) != 1:  # order is always even here
            return root
    raise ValueError(f"no root of unity of order {order} mod {p}")
