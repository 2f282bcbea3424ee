"""The hash chain: single serialized writer, externally verifiable."""

from __future__ import annotations

import hashlib
import struct
import threading
from dataclasses import dataclass

from petward.ledger.events import AuditEvent, EventKind

GENESIS_PREV_HASH = bytes(32)


def block_hash(index: int, prev_hash: bytes, event_bytes: bytes) -> bytes:
    return hashlib.sha256(struct.pack(">Q", index) + prev_hash + event_bytes).digest()


@dataclass(frozen=True)
class AuditBlock:
    index: int
    prev_hash: bytes
    event: AuditEvent
    hash: bytes

    def recompute_hash(self) -> bytes:
        return block_hash(self.index, self.prev_hash, self.event.canonical_bytes())


@dataclass
class LedgerQuery:
    user_id: str | None = None
    kind: EventKind | None = None
    request_id: str | None = None
    from_ms: int | None = None
    to_ms: int | None = None

    def matches(self, event: AuditEvent) -> bool:
        if self.user_id is not None and event.user_id != self.user_id:
            return False
        if self.kind is not None and event.kind != self.kind:
            return False
        if self.request_id is not None and event.request_id != self.request_id:
            return False
        if self.from_ms is not None and event.timestamp_ms < self.from_ms:
            return False
        if self.to_ms is not None and event.timestamp_ms > self.to_ms:
            return False
        return True


class AuditLedger:
    """Append-only hash chain.

    The public surface offers append, query, and verify only; blocks are
    never mutated or deleted. An optional sink (see logfile) persists
    each block durably before append returns.
    """

    def __init__(self, sink=None, blocks: list[AuditBlock] | None = None):
        self._blocks: list[AuditBlock] = list(blocks) if blocks else []
        self._sink = sink
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._blocks)

    def append(self, event: AuditEvent) -> AuditBlock:
        event.validate()
        with self._lock:
            index = len(self._blocks)
            prev = self._blocks[-1].hash if self._blocks else GENESIS_PREV_HASH
            block = AuditBlock(index, prev, event, block_hash(index, prev, event.canonical_bytes()))
            if self._sink is not None:
                self._sink.write_block(block)
            self._blocks.append(block)
            return block

    def blocks(self) -> list[AuditBlock]:
        with self._lock:
            return list(self._blocks)

    def query(self, q: LedgerQuery | None = None, **kwargs) -> list[AuditEvent]:
        q = q or LedgerQuery(**kwargs)
        return [b.event for b in self.blocks() if q.matches(b.event)]

    def verify_chain(self, start: int = 0, end: int | None = None) -> int | None:
        """Recompute every hash link over a snapshot; None means ok,
        otherwise the first failing index."""
        snapshot = self.blocks()
        return verify_blocks(snapshot, start, end)


def verify_blocks(blocks: list[AuditBlock], start: int = 0, end: int | None = None) -> int | None:
    end = len(blocks) if end is None else min(end, len(blocks))
    for i in range(start, end):
        block = blocks[i]
        if block.index != i:
            return i
        expected_prev = GENESIS_PREV_HASH if i == 0 else blocks[i - 1].hash
        if block.prev_hash != expected_prev:
            return i
        if block.recompute_hash() != block.hash:
            return i
    return None
