"""Negacyclic number-theoretic transform over Z_p, p prime, p = 1 (mod 2n).

The forward transform evaluates a polynomial of degree < n at the odd
powers psi^(2j+1) of a primitive 2n-th root of unity psi, which turns
multiplication in Z_p[x]/(x^n + 1) into a pointwise product. The same
transform over the plaintext modulus realizes slot packing: slots are
exactly these evaluations.
"""

from __future__ import annotations

from functools import lru_cache

from petward.numutil import find_root_of_unity, modinv


def _bit_reverse_permute(vec: list[int]) -> list[int]:
    n = len(vec)
    bits = n.bit_length() - 1
    out = [0] * n
    for i, v in enumerate(vec):
        out[int(format(i, f"0{bits}b")[::-1], 2) if bits else 0] = v
    return out


class NegacyclicNTT:
    def __init__(self, n: int, p: int):
        if n & (n - 1) or n < 2:
            raise ValueError(f"ring degree must be a power of two >= 2, got {n}")
        if (p - 1) % (2 * n):
            raise ValueError(f"{p} violates p = 1 (mod {2 * n})")
        self.n = n
        self.p = p
        self.psi = find_root_of_unity(2 * n, p)
        self.psi_inv = modinv(self.psi, p)
        self.omega = self.psi * self.psi % p
        self.omega_inv = modinv(self.omega, p)
        self.n_inv = modinv(n, p)
        self._psi_pows = [pow(self.psi, i, p) for i in range(n)]
        self._psi_inv_pows = [pow(self.psi_inv, i, p) for i in range(n)]

    def _cyclic(self, vec: list[int], root: int) -> list[int]:
        n, p = self.n, self.p
        a = _bit_reverse_permute(vec)
        length = 2
        while length <= n:
            step_root = pow(root, n // length, p)
            half = length // 2
            for start in range(0, n, length):
                w = 1
                for j in range(start, start + half):
                    u = a[j]
                    v = a[j + half] * w % p
                    a[j] = (u + v) % p
                    a[j + half] = (u - v) % p
                    w = w * step_root % p
            length *= 2
        return a

    def forward(self, coeffs: list[int]) -> list[int]:
        """Coefficients -> evaluations at psi^(2j+1) (slot values)."""
        twisted = [c % self.p * self._psi_pows[i] % self.p for i, c in enumerate(coeffs)]
        return self._cyclic(twisted, self.omega)

    def inverse(self, values: list[int]) -> list[int]:
        """Slot values -> coefficients."""
        a = self._cyclic(list(values), self.omega_inv)
        return [
            x * self.n_inv % self.p * self._psi_inv_pows[i] % self.p
            for i, x in enumerate(a)
        ]

    def multiply(self, a: list[int], b: list[int]) -> list[int]:
        """Product in Z_p[x]/(x^n + 1)."""
        fa = self.forward(a)
        fb = self.forward(b)
        return self.inverse([x * y % self.p for x, y in zip(fa, fb)])


@lru_cache(maxsize=64)
def get_ntt(n: int, p: int) -> NegacyclicNTT:
    return NegacyclicNTT(n, p)
