"""In-process pub/sub for the server-sent event stream."""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass

EVENT_REQUEST_PENDING = "request.pending"
EVENT_REQUEST_DECIDED = "request.decided"
EVENT_LEDGER_APPENDED = "ledger.appended"


@dataclass(frozen=True)
class PushEvent:
    kind: str
    data: dict

    def to_sse(self) -> str:
        return f"event: {self.kind}\ndata: {json.dumps(self.data, sort_keys=True)}\n\n"


class EventBroker:
    def __init__(self):
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, kind: str, data: dict) -> None:
        event = PushEvent(kind, data)
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put(event)
