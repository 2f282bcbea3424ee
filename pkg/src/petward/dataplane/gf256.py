"""GF(2^8) arithmetic with log/antilog tables.

Field polynomial 0x11D (x^8 + x^4 + x^3 + x^2 + 1), generator 2: the
standard Reed-Solomon field. Tables are built once at import; bulk
operations over byte arrays go through a 256x256 product table so numpy
can vectorize them.
"""

from __future__ import annotations

import numpy as np

FIELD_POLY = 0x11D
GENERATOR = 2
ORDER = 255  # multiplicative group size

_EXP = [0] * (2 * ORDER)  # antilog, doubled so products skip a mod 255
_LOG = [0] * 256  # log[0] unused

x = 1
for i in range(ORDER):
    _EXP[i] = x
    _LOG[x] = i
    x <<= 1
    if x & 0x100:
        x ^= FIELD_POLY
for i in range(ORDER, 2 * ORDER):
    _EXP[i] = _EXP[i - ORDER]
del x


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return _EXP[(_LOG[a] - _LOG[b]) % ORDER]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(256)")
    return _EXP[ORDER - _LOG[a]]


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return _EXP[(_LOG[a] * n) % ORDER]


def gf_mul_slow(a: int, b: int) -> int:
    """Schoolbook carry-less multiply reduced mod FIELD_POLY.

    Independent of the tables; kept as the oracle the tables are
    verified against.
    """
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= FIELD_POLY
    return result


# Full product table: MUL_TABLE[a][vec] multiplies every byte of vec by a.
MUL_TABLE = np.zeros((256, 256), dtype=np.uint8)
for a in range(1, 256):
    for b in range(1, 256):
        MUL_TABLE[a, b] = _EXP[_LOG[a] + _LOG[b]]


def gf_mul_bytes(scalar: int, vec: np.ndarray) -> np.ndarray:
    """Multiply every byte of ``vec`` by ``scalar`` in GF(256)."""
    if scalar == 0:
        return np.zeros_like(vec)
    return MUL_TABLE[scalar][vec]


def gf_matrix_invert(matrix: list[list[int]]) -> list[list[int]]:
    """Invert a square matrix over GF(256) by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [row[:] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(256)")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = gf_inv(aug[col][col])
        aug[col] = [gf_mul(v, inv_p) for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v ^ gf_mul(factor, p) for v, p in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]
