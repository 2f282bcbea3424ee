"""Audit events and their canonical binary encoding.

The canonical encoding is what gets hashed, so it is fixed here and in
docs/ledger-format.md: fields in declaration order, strings as u32
length + UTF-8 bytes, the category set and the detail map sorted before
encoding, timestamp as a signed big-endian u64.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

from petward import PetwardError


class EventKind(str, enum.Enum):
    REQUESTED = "Requested"
    NOTIFIED = "Notified"
    DECIDED = "Decided"
    KEY_RELEASED = "KeyReleased"
    DECRYPTED = "Decrypted"
    REVOKED = "Revoked"
    DP_RELEASED = "DpReleased"


# Revoked is tied to a user/leaf, not a transfer request.
_KINDS_REQUIRING_REQUEST_ID = frozenset(EventKind) - {EventKind.REVOKED}
_DECISIONS = frozenset({"allow", "deny"})
_DECIDERS = frozenset({"policy", "user"})


class EventValidationError(PetwardError):
    pass


def _enc_str(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack(">I", len(raw)) + raw


@dataclass(frozen=True)
class AuditEvent:
    kind: EventKind
    user_id: str
    actor: str
    timestamp_ms: int
    request_id: str = ""
    categories: frozenset[str] = frozenset()
    decision: str = ""
    decided_by: str = ""
    detail: dict[str, str] = field(default_factory=dict)

    def validate(self) -> "AuditEvent":
        if self.kind in _KINDS_REQUIRING_REQUEST_ID and not self.request_id:
            raise EventValidationError(f"{self.kind.value} event requires a request_id")
        if self.kind is EventKind.DECIDED:
            if self.decision not in _DECISIONS:
                raise EventValidationError(
                    f"Decided event requires decision in {sorted(_DECISIONS)}, got {self.decision!r}"
                )
            if self.decided_by not in _DECIDERS:
                raise EventValidationError(
                    f"Decided event requires decided_by in {sorted(_DECIDERS)}, got {self.decided_by!r}"
                )
        if not self.user_id:
            raise EventValidationError("event requires a user_id")
        if not self.actor:
            raise EventValidationError("event requires an actor")
        return self

    def canonical_bytes(self) -> bytes:
        parts = [
            _enc_str(self.kind.value),
            _enc_str(self.user_id),
            _enc_str(self.actor),
            struct.pack(">q", self.timestamp_ms),
            _enc_str(self.request_id),
            struct.pack(">H", len(self.categories)),
        ]
        parts.extend(_enc_str(c) for c in sorted(self.categories))
        parts.append(_enc_str(self.decision))
        parts.append(_enc_str(self.decided_by))
        parts.append(struct.pack(">H", len(self.detail)))
        for key in sorted(self.detail):
            parts.append(_enc_str(key))
            parts.append(_enc_str(self.detail[key]))
        return b"".join(parts)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "user_id": self.user_id,
            "actor": self.actor,
            "timestamp_ms": self.timestamp_ms,
            "request_id": self.request_id,
            "categories": sorted(self.categories),
            "decision": self.decision,
            "decided_by": self.decided_by,
            "detail": dict(self.detail),
        }

    @staticmethod
    def from_canonical(raw: bytes) -> "AuditEvent":
        view = memoryview(raw)
        offset = 0

        def read_str() -> str:
            nonlocal offset
            (length,) = struct.unpack_from(">I", view, offset)
            offset += 4
            out = bytes(view[offset : offset + length]).decode("utf-8")
            offset += length
            return out

        kind = EventKind(read_str())
        user_id = read_str()
        actor = read_str()
        (timestamp_ms,) = struct.unpack_from(">q", view, offset)
        offset += 8
        request_id = read_str()
        (n_cat,) = struct.unpack_from(">H", view, offset)
        offset += 2
        categories = frozenset(read_str() for _ in range(n_cat))
        decision = read_str()
        decided_by = read_str()
        (n_detail,) = struct.unpack_from(">H", view, offset)
        offset += 2
        detail = {}
        for _ in range(n_detail):
            key = read_str()
            detail[key] = read_str()
        if offset != len(raw):
            raise EventValidationError("trailing bytes after canonical event")
        return AuditEvent(
            kind=kind,
            user_id=user_id,
            actor=actor,
            timestamp_ms=timestamp_ms,
            request_id=request_id,
            categories=categories,
            decision=decision,
            decided_by=decided_by,
            detail=detail,
        )
