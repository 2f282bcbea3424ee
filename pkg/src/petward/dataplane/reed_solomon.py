"""Systematic Reed-Solomon erasure coding over GF(2^8).

An object is split into k data shards; m parity shards are produced from a
normalized Vandermonde generator matrix, so the first k chunks are the
plain data split and any k of the k+m chunks reconstruct the original.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from petward import PetwardError
from petward.dataplane.gf256 import gf_matrix_invert, gf_mul, gf_mul_bytes, gf_pow

MAX_SHARDS = 255  # GF(2^8) supports at most 255 distinct evaluation points


class ErasureCodingError(PetwardError):
    pass


class UnrecoverableError(ErasureCodingError):
    """Fewer than k chunks available; carries the missing indices."""

    def __init__(self, missing: list[int], needed: int, have: int):
        self.missing = missing
        super().__init__(
            f"need {needed} chunks, have {have}; missing indices {sorted(missing)}"
        )


@dataclass(frozen=True)
class Chunk:
    content_id: bytes  # sha256 of the chunk bytes
    index: int  # position within the stripe, 0..k+m-1
    data: bytes

    @staticmethod
    def of(index: int, data: bytes) -> "Chunk":
        return Chunk(hashlib.sha256(data).digest(), index, data)

    def verify(self) -> bool:
        return hashlib.sha256(self.data).digest() == self.content_id


def _generator_matrix(k: int, m: int) -> list[list[int]]:
    """(k+m) x k generator whose top k rows are the identity.

    Built from a Vandermonde matrix at distinct points alpha^i, then
    right-multiplied by the inverse of its top square so the code is
    systematic. Any k rows stay invertible.
    """
    vand = [[gf_pow(gf_pow(2, i), j) for j in range(k)] for i in range(k + m)]
    top_inv = gf_matrix_invert([row[:] for row in vand[:k]])
    out = []
    for row in vand:
        out.append(
            [
                _dot_row(row, [top_inv[x][col] for x in range(k)])
                for col in range(k)
            ]
        )
    return out


def _dot_row(a: list[int], b: list[int]) -> int:
    acc = 0
    for x, y in zip(a, b):
        acc ^= gf_mul(x, y)
    return acc


def _validate_stripe(k: int, m: int) -> None:
    if k < 1:
        raise ErasureCodingError(f"k must be >= 1, got {k}")
    if m < 0:
        raise ErasureCodingError(f"m must be >= 0, got {m}")
    if k + m > MAX_SHARDS:
        raise ErasureCodingError(f"k + m must be <= {MAX_SHARDS}, got {k + m}")


def rs_encode(data: bytes, k: int, m: int) -> list[Chunk]:
    """Encode ``data`` into k data chunks followed by m parity chunks."""
    _validate_stripe(k, m)
    shard_len = max(1, -(-len(data) // k))
    padded = np.frombuffer(data.ljust(shard_len * k, b"\x00"), dtype=np.uint8)
    shards = padded.reshape(k, shard_len)
    chunks = [Chunk.of(i, shards[i].tobytes()) for i in range(k)]
    gen = _generator_matrix(k, m)
    for j in range(m):
        row = gen[k + j]
        parity = np.zeros(shard_len, dtype=np.uint8)
        for i in range(k):
            parity ^= gf_mul_bytes(row[i], shards[i])
        chunks.append(Chunk.of(k + j, parity.tobytes()))
    return chunks


def rs_decode(chunks: list[Chunk], k: int, m: int, original_length: int) -> bytes:
    """Reconstruct the original bytes from any >= k distinct chunks."""
    _validate_stripe(k, m)
    by_index = {}
    for c in chunks:
        if not 0 <= c.index < k + m:
            raise ErasureCodingError(f"chunk index {c.index} outside stripe")
        by_index.setdefault(c.index, c)
    if len(by_index) < k:
        missing = [i for i in range(k + m) if i not in by_index]
        raise UnrecoverableError(missing, needed=k, have=len(by_index))

    if all(i in by_index for i in range(k)):
        data = b"".join(by_index[i].data for i in range(k))
        return data[:original_length]

    use = sorted(by_index)[:k]
    gen = _generator_matrix(k, m)
    sub = [gen[i] for i in use]
    inv = gf_matrix_invert(sub)
    shard_len = len(by_index[use[0]].data)
    shards = [np.frombuffer(by_index[i].data, dtype=np.uint8) for i in use]
    out = []
    for row in range(k):
        acc = np.zeros(shard_len, dtype=np.uint8)
        for col in range(k):
            acc ^= gf_mul_bytes(inv[row][col], shards[col])
        out.append(acc.tobytes())
    return b"".join(out)[:original_length]
