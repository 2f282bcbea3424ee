"""Shared gateway state: every store the pipeline and API act on.

Each store keeps its own single-writer discipline; the gateway layer
wires their events together (a decision appends a ledger block and
pushes a notification) and enforces the transfer-trigger rule: nothing
is ever ledgered unless a transfer request caused it.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from petward.consent.policy import PolicyStore, evaluate_detailed
from petward.consent.requests import ALLOWED, PENDING, RequestStore, TransferRequest
from petward.dp.budget import PrivacyBudget, SensitivityTier
from petward.dataplane.storage import StorageNode, StoragePool
from petward.gateway.config import ScenarioConfig
from petward.gateway.events import (
    EVENT_LEDGER_APPENDED,
    EVENT_REQUEST_DECIDED,
    EVENT_REQUEST_PENDING,
    EventBroker,
)
from petward.gateway.keyservice import KeyService
from petward.he.presets import get_preset
from petward.ledger.chain import AuditLedger
from petward.ledger.events import AuditEvent, EventKind
from petward.ledger.logfile import open_ledger
from petward.telemetry.metrics import Metric


@dataclass
class PacketRecord:
    """Catalog entry for one stored (encrypted) telemetry packet."""

    manifest: "object"
    user_id: str
    device_id: str
    metric: Metric
    category: str
    count: int  # samples packed into the slots
    epoch: int  # key epoch the frame session key was derived from
    seq: int

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest.to_json(),
            "user_id": self.user_id,
            "device_id": self.device_id,
            "metric": self.metric.value,
            "category": self.category,
            "count": self.count,
            "epoch": self.epoch,
            "seq": self.seq,
        }


def wall_clock_ms() -> int:
    return int(time.time() * 1000)


class SimClock:
    """Deterministic scenario time."""

    def __init__(self, start_ms: int = 0):
        self.now_ms = start_ms

    def advance_to(self, when_ms: int) -> None:
        self.now_ms = max(self.now_ms, when_ms)

    def __call__(self) -> int:
        return self.now_ms


@dataclass
class GatewayState:
    config: ScenarioConfig
    clock: "object"  # callable -> ms
    ledger: AuditLedger
    policy_store: PolicyStore
    request_store: RequestStore
    key_service: KeyService
    pool: StoragePool
    tiers: SensitivityTier
    budgets: dict[str, PrivacyBudget]
    broker: EventBroker
    rng: random.Random
    run_dir: Path | None = None
    catalog: list[PacketRecord] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    epsilon_preferences: dict[str, float] = field(default_factory=dict)
    started_at: float = field(default_factory=time.time)
    rng_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _seq_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _counter_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _stream_seq: dict[tuple[str, str], int] = field(default_factory=dict)

    # ---- construction ----------------------------------------------------

    @staticmethod
    def build(
        config: ScenarioConfig,
        run_dir: Path | None = None,
        simulated_time: bool = True,
    ) -> "GatewayState":
        config.validate()
        params = get_preset(config.he_preset)
        if run_dir is not None:
            run_dir.mkdir(parents=True, exist_ok=True)
            ledger = open_ledger(run_dir / "ledger.petl")
            nodes = [
                StorageNode(f"node-{i}", root=run_dir / "nodes" / f"node-{i}")
                for i in range(config.node_count)
            ]
        else:
            ledger = AuditLedger()
            nodes = [StorageNode(f"node-{i}") for i in range(config.node_count)]
        defaults = SensitivityTier()
        tiers = SensitivityTier(
            category_tiers={**defaults.category_tiers, **config.dp_tiers.get("category_tiers", {})},
            tier_epsilon={**defaults.tier_epsilon, **config.dp_tiers.get("tier_epsilon", {})},
        )
        state = GatewayState(
            config=config,
            clock=SimClock() if simulated_time else wall_clock_ms,
            ledger=ledger,
            policy_store=PolicyStore(),
            request_store=RequestStore(ttl_ms=config.request_ttl_ms),
            key_service=KeyService(params, config.seed, config.revocation_leaves),
            pool=StoragePool(nodes),
            tiers=tiers,
            budgets={},
            broker=EventBroker(),
            rng=random.Random(config.seed ^ 0x5EED),
            run_dir=run_dir,
        )
        for user in config.users:
            state.policy_store.put(user.consent_policy())
            state.budgets[user.user_id] = PrivacyBudget(user.user_id, user.budget_epsilon)
            if user.epsilon_preference is not None:
                state.epsilon_preferences[user.user_id] = user.epsilon_preference
        return state

    # ---- small helpers ----------------------------------------------------

    def now_ms(self) -> int:
        return self.clock()

    def bump(self, counter: str, by: int = 1) -> None:
        with self._counter_lock:
            self.counters[counter] = self.counters.get(counter, 0) + by

    def budget_for(self, user_id: str) -> PrivacyBudget:
        if user_id not in self.budgets:
            self.budgets[user_id] = PrivacyBudget(user_id, 1.0)
        return self.budgets[user_id]

    def next_seq(self, device_id: str, metric: Metric) -> int:
        with self._seq_lock:
            key = (device_id, metric.value)
            seq = self._stream_seq.get(key, 0)
            self._stream_seq[key] = seq + 1
            return seq

    def records_for(self, user_id: str, category: str) -> list[PacketRecord]:
        return [r for r in self.catalog if r.user_id == user_id and r.category == category]

    def append_event(self, event: AuditEvent) -> None:
        block = self.ledger.append(event)
        self.broker.publish(
            EVENT_LEDGER_APPENDED,
            {"index": block.index, "kind": event.kind.value, "request_id": event.request_id},
        )

    # ---- transfer-request flow --------------------------------------------

    def create_transfer_request(
        self,
        requester: str,
        requester_class: str,
        user_id: str,
        categories: set[str],
        context: str,
        request_id: str | None = None,
    ) -> TransferRequest:
        now = self.now_ms()
        request = self.request_store.create(
            requester, requester_class, user_id, categories, context, now, request_id
        )
        self.append_event(
            AuditEvent(
                kind=EventKind.REQUESTED,
                user_id=user_id,
                actor=requester,
                timestamp_ms=now,
                request_id=request.request_id,
                categories=frozenset(categories),
                detail={"requester_class": requester_class, "context": context},
            )
        )
        decision, reason = evaluate_detailed(request, self.policy_store.get(user_id))
        if decision in ("allow", "deny"):
            request = self._settle(
                request.request_id, decision, actor="policy", decided_by="policy", reason=reason
            )
        else:
            self.append_event(
                AuditEvent(
                    kind=EventKind.NOTIFIED,
                    user_id=user_id,
                    actor="gateway",
                    timestamp_ms=self.now_ms(),
                    request_id=request.request_id,
                    categories=frozenset(categories),
                )
            )
            self.broker.publish(EVENT_REQUEST_PENDING, request.to_dict())
        return self.request_store.get(request.request_id, self.now_ms())

    def decide_request(self, request_id: str, decision: str, actor: str) -> TransferRequest:
        """A user settles a pending request (idempotent on repeats)."""
        before = self.request_store.get(request_id, self.now_ms())
        if before.state != PENDING and before.decision == decision:
            return before  # idempotent repeat: no duplicate ledger block
        return self._settle(request_id, decision, actor=actor, decided_by="user")

    def _settle(
        self, request_id: str, decision: str, actor: str, decided_by: str, reason: str = ""
    ) -> TransferRequest:
        request = self.request_store.decide(
            request_id, decision, actor=actor, now_ms=self.now_ms(), decided_by=decided_by
        )
        self.append_event(
            AuditEvent(
                kind=EventKind.DECIDED,
                user_id=request.user_id,
                actor=actor,
                timestamp_ms=self.now_ms(),
                request_id=request.request_id,
                categories=request.categories,
                decision=decision,
                decided_by=decided_by,
                detail={"reason": reason} if reason else {},
            )
        )
        if request.state == ALLOWED:
            self.key_service.grant(request.user_id, request.requester, set(request.categories))
        self.broker.publish(EVENT_REQUEST_DECIDED, request.to_dict())
        return request

    def revoke_requester(self, user_id: str, requester: str) -> int:
        epoch = self.key_service.revoke(user_id, requester)
        self.append_event(
            AuditEvent(
                kind=EventKind.REVOKED,
                user_id=user_id,
                actor=user_id,
                timestamp_ms=self.now_ms(),
                detail={"requester": requester, "epoch": str(epoch)},
            )
        )
        return epoch

    def metrics_snapshot(self) -> dict:
        pending = 0
        for user in {u.user_id for u in self.config.users}:
            pending += len(self.request_store.pending_for(user, self.now_ms()))
        return {
            "packets_processed": self.counters.get("packets", 0),
            "samples_ingested": self.counters.get("samples", 0),
            "ledger_blocks": len(self.ledger),
            "pending_requests": pending,
            "releases": self.counters.get("releases", 0),
            "envelope_unwraps": self.key_service.unwrap_count,
            "uptime_s": round(time.time() - self.started_at, 3),
        }
