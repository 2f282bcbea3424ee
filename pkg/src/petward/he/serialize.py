"""Stable binary serialization for keys and ciphertexts.

Layout: magic ``PWHE``, version byte, kind byte, 8-byte params hash, then
kind-specific sections. Integer arrays are length-prefixed with a fixed
little-endian element width. The params hash ties material to the exact
parameter set it was created under.
"""

from __future__ import annotations

import struct

from petward import PetwardError
from petward.he.params import HeParams
from petward.he.scheme import Ciphertext, KeySet

HE_MAGIC = b"PWHE"
HE_VERSION = 1
KIND_KEYSET = 1
KIND_CIPHERTEXT = 2


class SerializationError(PetwardError):
    pass


def _write_array(out: list[bytes], values: tuple[int, ...], width: int) -> None:
    out.append(struct.pack("<IH", len(values), width))
    for v in values:
        out.append(int(v).to_bytes(width, "little", signed=True))


class _Reader:
    def __init__(self, raw: bytes, offset: int):
        self.raw = raw
        self.offset = offset

    def array(self) -> tuple[int, ...]:
        count, width = struct.unpack_from("<IH", self.raw, self.offset)
        self.offset += 6
        values = []
        for _ in range(count):
            values.append(int.from_bytes(self.raw[self.offset : self.offset + width], "little", signed=True))
            self.offset += width
        return tuple(values)

    def byte(self) -> int:
        b = self.raw[self.offset]
        self.offset += 1
        return b


def _element_width(params: HeParams) -> int:
    # top-level coefficients plus a sign bit
    return (params.modulus_at(params.levels).bit_length() + 8) // 8


def _header(kind: int, params: HeParams) -> bytes:
    return HE_MAGIC + bytes([HE_VERSION, kind]) + params.params_hash


def _check_header(raw: bytes, kind: int, params: HeParams) -> int:
    if raw[:4] != HE_MAGIC:
        raise SerializationError("bad magic; not key/ciphertext material")
    if raw[4] != HE_VERSION:
        raise SerializationError(f"unsupported serialization version {raw[4]}")
    if raw[5] != kind:
        raise SerializationError(f"wrong material kind {raw[5]}, expected {kind}")
    if raw[6:14] != params.params_hash:
        raise SerializationError("params hash mismatch: material was made under different parameters")
    return 14


def serialize_keyset(keys: KeySet) -> bytes:
    width = _element_width(keys.params)
    out = [_header(KIND_KEYSET, keys.params)]
    _write_array(out, keys.secret, width)
    _write_array(out, keys.public[0], width)
    _write_array(out, keys.public[1], width)
    out.append(struct.pack("<H", len(keys.relin)))
    for bj, aj in keys.relin:
        _write_array(out, bj, width)
        _write_array(out, aj, width)
    return b"".join(out)


def deserialize_keyset(raw: bytes, params: HeParams) -> KeySet:
    offset = _check_header(raw, KIND_KEYSET, params)
    reader = _Reader(raw, offset)
    secret = reader.array()
    p0 = reader.array()
    p1 = reader.array()
    (n_relin,) = struct.unpack_from("<H", raw, reader.offset)
    reader.offset += 2
    relin = tuple((reader.array(), reader.array()) for _ in range(n_relin))
    return KeySet(secret=secret, public=(p0, p1), relin=relin, params=params)


def serialize_ciphertext(ct: Ciphertext) -> bytes:
    width = _element_width(ct.params)
    out = [_header(KIND_CIPHERTEXT, ct.params), bytes([ct.level, ct.degree])]
    for part in ct.parts:
        _write_array(out, part, width)
    return b"".join(out)


def deserialize_ciphertext(raw: bytes, params: HeParams) -> Ciphertext:
    offset = _check_header(raw, KIND_CIPHERTEXT, params)
    reader = _Reader(raw, offset)
    level = reader.byte()
    degree = reader.byte()
    parts = tuple(reader.array() for _ in range(degree))
    return Ciphertext(parts=parts, level=level, params=params)
