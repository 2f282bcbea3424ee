"""Append-only ledger log file.

Layout: magic ``PETL``, one version byte, then per block a u32 length
prefix followed by the block record (index u64, prev_hash 32 bytes,
canonical event bytes, block hash 32 bytes). Each append is fsync'd
before the ledger acknowledges it.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

from petward import PetwardError
from petward.ledger.chain import AuditBlock, AuditLedger
from petward.ledger.events import AuditEvent, EventValidationError

LEDGER_MAGIC = b"PETL"
LEDGER_VERSION = 1


class LedgerFileError(PetwardError):
    pass


def _encode_block(block: AuditBlock) -> bytes:
    event_bytes = block.event.canonical_bytes()
    record = struct.pack(">Q", block.index) + block.prev_hash + event_bytes + block.hash
    return struct.pack(">I", len(record)) + record


def _decode_record(record: bytes) -> AuditBlock:
    if len(record) < 8 + 32 + 32:
        raise LedgerFileError("block record truncated")
    (index,) = struct.unpack_from(">Q", record, 0)
    prev_hash = record[8:40]
    event_bytes = record[40:-32]
    stored_hash = record[-32:]
    try:
        event = AuditEvent.from_canonical(event_bytes)
    except (EventValidationError, ValueError, UnicodeDecodeError, struct.error) as exc:
        raise LedgerFileError(f"undecodable event in block {index}: {exc}") from exc
    return AuditBlock(index, prev_hash, event, stored_hash)


class LedgerFile:
    """Durable sink for AuditLedger: one fsync per appended block."""

    def __init__(self, path: Path):
        self.path = path
        fresh = not path.exists() or path.stat().st_size == 0
        self._fh = open(path, "ab")
        if fresh:
            self._fh.write(LEDGER_MAGIC + bytes([LEDGER_VERSION]))
            self._flush()

    def write_block(self, block: AuditBlock) -> None:
        self._fh.write(_encode_block(block))
        self._flush()

    def _flush(self) -> None:
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()


def read_blocks(path: Path) -> list[AuditBlock]:
    """Parse a ledger file. Structural damage raises LedgerFileError."""
    raw = Path(path).read_bytes()
    if len(raw) < 5 or raw[:4] != LEDGER_MAGIC:
        raise LedgerFileError(f"{path}: missing ledger magic")
    if raw[4] != LEDGER_VERSION:
        raise LedgerFileError(f"{path}: unsupported ledger version {raw[4]}")
    blocks = []
    offset = 5
    while offset < len(raw):
        if offset + 4 > len(raw):
            raise LedgerFileError(f"{path}: truncated length prefix at byte {offset}")
        (length,) = struct.unpack_from(">I", raw, offset)
        offset += 4
        if offset + length > len(raw):
            raise LedgerFileError(f"{path}: truncated block at byte {offset}")
        blocks.append(_decode_record(raw[offset : offset + length]))
        offset += length
    return blocks


def open_ledger(path: Path) -> AuditLedger:
    """Open (or create) a file-backed ledger, loading any existing chain."""
    path = Path(path)
    blocks = read_blocks(path) if path.exists() and path.stat().st_size > 0 else []
    return AuditLedger(sink=LedgerFile(path), blocks=blocks)
