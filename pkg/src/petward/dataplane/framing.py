"""MAC-authenticated framing for payloads in transit.

Wire format (big-endian):

    magic "PWFR" | version u8 | codec u8 | seq u64 | payload_len u32 |
    payload | tag[16]

The tag is HMAC-SHA256 over everything before it, truncated to 16 bytes,
keyed by the session key. Receivers verify the tag before touching the
payload and reject non-increasing sequence numbers.
"""

from __future__ import annotations

import hmac
import hashlib
import struct
from dataclasses import dataclass

from petward import PetwardError

FRAME_MAGIC = b"PWFR"
FRAME_VERSION = 1
TAG_LEN = 16
_HEADER = struct.Struct(">4sBBQI")


class FramingError(PetwardError):
    pass


class IntegrityError(FramingError):
    """Authentication tag did not verify."""


class ReplayError(FramingError):
    """Sequence number did not advance."""


@dataclass(frozen=True)
class Frame:
    codec_id: int
    seq: int
    payload: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(FRAME_MAGIC, FRAME_VERSION, self.codec_id, self.seq, len(self.payload))
        return header + self.payload + self.tag


def _tag(session_key: bytes, header: bytes, payload: bytes) -> bytes:
    return hmac.new(session_key, header + payload, hashlib.sha256).digest()[:TAG_LEN]


def frame(payload: bytes, session_key: bytes, seq: int, codec_id: int = 0) -> Frame:
    if seq < 0:
        raise FramingError("sequence number must be non-negative")
    header = _HEADER.pack(FRAME_MAGIC, FRAME_VERSION, codec_id, seq, len(payload))
    return Frame(codec_id, seq, payload, _tag(session_key, header, payload))


def unframe(data: bytes, session_key: bytes) -> Frame:
    """Parse and authenticate one frame. Raises before exposing any payload."""
    if len(data) < _HEADER.size + TAG_LEN:
        raise IntegrityError("frame truncated")
    magic, version, codec_id, seq, length = _HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise IntegrityError("bad frame magic")
    if version != FRAME_VERSION:
        raise IntegrityError(f"unsupported frame version {version}")
    if len(data) != _HEADER.size + length + TAG_LEN:
        raise IntegrityError("frame length mismatch")
    payload = data[_HEADER.size : _HEADER.size + length]
    tag = data[-TAG_LEN:]
    expected = _tag(session_key, data[: _HEADER.size], payload)
    if not hmac.compare_digest(tag, expected):
        raise IntegrityError("authentication tag mismatch")
    return Frame(codec_id, seq, payload, tag)


class FrameReceiver:
    """Per-session receive state enforcing strictly increasing sequence numbers."""

    def __init__(self, session_key: bytes):
        self._key = session_key
        self._last_seq: int | None = None

    def receive(self, data: bytes) -> bytes:
        f = unframe(data, self._key)
        if self._last_seq is not None and f.seq <= self._last_seq:
            raise ReplayError(f"sequence {f.seq} does not advance past {self._last_seq}")
        self._last_seq = f.seq
        return f.payload
