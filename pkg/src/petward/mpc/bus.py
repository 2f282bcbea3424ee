"""In-process message bus with explicit rounds.

Every cross-party value moves through here, so a protocol run leaves a
deterministic, replayable transcript: one record per message with the
payload hashed (the transcript itself must not leak shares).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

DEALER = "dealer"
BROADCAST = "*"


@dataclass(frozen=True)
class BusRecord:
    round: int
    frm: str
    to: str
    kind: str
    payload_hash: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "round": self.round,
                "from": self.frm,
                "to": self.to,
                "kind": self.kind,
                "payload_hash": self.payload_hash,
            },
            sort_keys=True,
        )


@dataclass
class MessageBus:
    records: list[BusRecord] = field(default_factory=list)
    current_round: int = 0

    def next_round(self) -> int:
        self.current_round += 1
        return self.current_round

    def send(self, frm: str, to: str, kind: str, payload: bytes) -> None:
        digest = hashlib.sha256(payload).hexdigest()
        self.records.append(BusRecord(self.current_round, frm, to, kind, digest))

    def transcript_jsonl(self) -> str:
        return "\n".join(r.to_json() for r in self.records)
