"""Lossless payload codecs. Codec 0 is identity and always available;
codec 1 is DEFLATE, the default for telemetry frames."""

from __future__ import annotations

import zlib

from petward import PetwardError

CODEC_IDENTITY = 0
CODEC_DEFLATE = 1


class CodecError(PetwardError):
    pass


def compress(data: bytes, codec_id: int = CODEC_DEFLATE) -> bytes:
    if codec_id == CODEC_IDENTITY:
        return data
    if codec_id == CODEC_DEFLATE:
        return zlib.compress(data, level=6)
    raise CodecError(f"unknown codec id {codec_id}")


def decompress(data: bytes, codec_id: int = CODEC_DEFLATE) -> bytes:
    if codec_id == CODEC_IDENTITY:
        return data
    if codec_id == CODEC_DEFLATE:
        try:
            return zlib.decompress(data)
        except zlib.error as exc:
            raise CodecError(f"corrupt DEFLATE stream: {exc}") from exc
    raise CodecError(f"unknown codec id {codec_id}")
