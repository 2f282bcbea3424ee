"""Transfer requests and their pending-approval lifecycle.

State machine: pending -> allowed | denied | expired. Decisions are
immutable once made; repeating the same decision is a no-op, a different
one is a conflict. Pending requests expire after a TTL (simulated time).
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace

from petward import PetwardError
from petward.consent.policy import CONTEXT_TAGS, RECIPIENT_CLASSES, PolicyError

DEFAULT_TTL_MS = 24 * 60 * 60 * 1000

PENDING = "pending"
ALLOWED = "allowed"
DENIED = "denied"
EXPIRED = "expired"

_DECISION_STATE = {"allow": ALLOWED, "deny": DENIED}


class AuthorizationError(PetwardError):
    pass


class DecisionConflictError(PetwardError):
    pass


class UnknownRequestError(PetwardError):
    pass


@dataclass(frozen=True)
class TransferRequest:
    request_id: str
    requester: str
    requester_class: str
    user_id: str
    categories: frozenset[str]
    context: str
    state: str = PENDING
    created_ms: int = 0
    decided_ms: int | None = None
    decided_by: str | None = None  # "policy" or "user" once decided

    def __post_init__(self):
        if self.requester_class not in RECIPIENT_CLASSES:
            raise PolicyError(f"unknown recipient class {self.requester_class!r}")
        if self.context not in CONTEXT_TAGS:
            raise PolicyError(f"unknown context tag {self.context!r}")
        if not self.categories:
            raise PolicyError("a transfer request must name at least one category")

    @property
    def decision(self) -> str | None:
        if self.state == ALLOWED:
            return "allow"
        if self.state == DENIED:
            return "deny"
        return None

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "requester": self.requester,
            "requester_class": self.requester_class,
            "user_id": self.user_id,
            "categories": sorted(self.categories),
            "context": self.context,
            "state": self.state,
            "created_ms": self.created_ms,
            "decided_ms": self.decided_ms,
            "decided_by": self.decided_by,
        }


@dataclass
class RequestStore:
    """Transfer requests with atomic state transitions."""

    ttl_ms: int = DEFAULT_TTL_MS
    _requests: dict[str, TransferRequest] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def create(
        self,
        requester: str,
        requester_class: str,
        user_id: str,
        categories: frozenset[str] | set[str],
        context: str,
        now_ms: int,
        request_id: str | None = None,
    ) -> TransferRequest:
        request = TransferRequest(
            request_id=request_id or str(uuid.uuid4()),
            requester=requester,
            requester_class=requester_class,
            user_id=user_id,
            categories=frozenset(categories),
            context=context,
            created_ms=now_ms,
        )
        with self._lock:
            if request.request_id in self._requests:
                raise DecisionConflictError(f"request id {request.request_id} already exists")
            self._requests[request.request_id] = request
        return request

    def get(self, request_id: str, now_ms: int | None = None) -> TransferRequest:
        with self._lock:
            request = self._requests.get(request_id)
            if request is None:
                raise UnknownRequestError(f"no transfer request {request_id}")
            if now_ms is not None:
                request = self._expire_locked(request, now_ms)
            return request

    def all_requests(self, now_ms: int | None = None) -> list[TransferRequest]:
        with self._lock:
            requests = list(self._requests.values())
            if now_ms is not None:
                requests = [self._expire_locked(r, now_ms) for r in requests]
            return sorted(requests, key=lambda r: (r.created_ms, r.request_id))

    def pending_for(self, user_id: str, now_ms: int) -> list[TransferRequest]:
        with self._lock:
            out = []
            for request in self._requests.values():
                request = self._expire_locked(request, now_ms)
                if request.user_id == user_id and request.state == PENDING:
                    out.append(request)
            return sorted(out, key=lambda r: r.created_ms)

    def decide(
        self,
        request_id: str,
        decision: str,
        actor: str,
        now_ms: int,
        decided_by: str = "user",
    ) -> TransferRequest:
        """Settle a pending request. Idempotent on repeating the same
        decision; a different decision on a settled request conflicts."""
        if decision not in _DECISION_STATE:
            raise PolicyError(f"decision must be allow or deny, got {decision!r}")
        with self._lock:
            request = self._requests.get(request_id)
            if request is None:
                raise UnknownRequestError(f"no transfer request {request_id}")
            request = self._expire_locked(request, now_ms)
            if decided_by == "user" and actor != request.user_id:
                raise AuthorizationError(
                    f"only {request.user_id} may decide request {request_id}, not {actor}"
                )
            target = _DECISION_STATE[decision]
            if request.state == target:
                return request  # no-op repeat
            if request.state != PENDING:
                raise DecisionConflictError(
                    f"request {request_id} already {request.state}; cannot {decision}"
                )
            decided = replace(request, state=target, decided_ms=now_ms, decided_by=decided_by)
            self._requests[request_id] = decided
            return decided

    def _expire_locked(self, request: TransferRequest, now_ms: int) -> TransferRequest:
        if request.state == PENDING and now_ms - request.created_ms >= self.ttl_ms:
            request = replace(request, state=EXPIRED, decided_ms=None, decided_by=None)
            self._requests[request.request_id] = request
        return request
