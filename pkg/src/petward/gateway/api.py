"""HTTP/SSE surface for the gateway.

JSON endpoints over the shared state plus a server-sent event stream for
real-time notifications; the dashboard's static bundle is served from /
when a build exists.
"""

from __future__ import annotations

import queue
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from petward.consent.policy import ConsentPolicy, PolicyError, VersionConflictError
from petward.consent.requests import (
    AuthorizationError,
    DecisionConflictError,
    UnknownRequestError,
)
from petward.dp.budget import BudgetExhaustedError
from petward.gateway.pipeline import ReleaseError, release_for_analysis
from petward.gateway.state import GatewayState
from petward.ledger.chain import LedgerQuery
from petward.ledger.events import EventKind

SSE_POLL_S = 1.0
SSE_HEARTBEAT_POLLS = 5


class CreateRequestIn(BaseModel):
    requester: str
    requester_class: str
    user_id: str
    categories: list[str] = Field(min_length=1)
    context: str = "routine"


class DecisionIn(BaseModel):
    decision: str
    actor: str


class RequestOut(BaseModel):
    request_id: str
    requester: str
    requester_class: str
    user_id: str
    categories: list[str]
    context: str
    state: str
    created_ms: int
    decided_ms: int | None
    decided_by: str | None


class ContextRuleIn(BaseModel):
    priority: int
    effect: str
    recipient_class: str | None = None
    category: str | None = None
    context: str | None = None


class PolicyIn(BaseModel):
    version: int  # the version the editor loaded; stale saves are rejected
    rules: dict[str, dict[str, str]] = Field(default_factory=dict)
    context_rules: list[ContextRuleIn] = Field(default_factory=list)


class PolicyOut(BaseModel):
    schema_version: int
    user_id: str
    version: int
    rules: dict[str, dict[str, str]]
    context_rules: list[ContextRuleIn]


class LedgerEntryOut(BaseModel):
    index: int
    hash: str
    event: dict


def _request_out(request) -> RequestOut:
    return RequestOut(**request.to_dict())


def create_app(state: GatewayState, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="petward gateway", version="0.1.0")

    @app.get("/requests/pending", response_model=list[RequestOut])
    def pending_requests(user: str = Query(...)):
        return [_request_out(r) for r in state.request_store.pending_for(user, state.now_ms())]

    @app.get("/requests/{request_id}", response_model=RequestOut)
    def get_request(request_id: str):
        try:
            return _request_out(state.request_store.get(request_id, state.now_ms()))
        except UnknownRequestError:
            raise HTTPException(404, f"no transfer request {request_id}") from None

    @app.post("/requests", response_model=RequestOut, status_code=201)
    def create_request(body: CreateRequestIn):
        try:
            request = state.create_transfer_request(
                requester=body.requester,
                requester_class=body.requester_class,
                user_id=body.user_id,
                categories=set(body.categories),
                context=body.context,
            )
        except PolicyError as exc:
            raise HTTPException(422, str(exc)) from None
        return _request_out(request)

    @app.post("/requests/{request_id}/decision", response_model=RequestOut)
    def decide(request_id: str, body: DecisionIn):
        try:
            return _request_out(state.decide_request(request_id, body.decision, body.actor))
        except UnknownRequestError:
            raise HTTPException(404, f"no transfer request {request_id}") from None
        except AuthorizationError as exc:
            raise HTTPException(403, str(exc)) from None
        except DecisionConflictError as exc:
            raise HTTPException(409, str(exc)) from None
        except PolicyError as exc:
            raise HTTPException(422, str(exc)) from None

    @app.post("/requests/{request_id}/release")
    def release(request_id: str):
        try:
            return release_for_analysis(state, request_id)
        except UnknownRequestError:
            raise HTTPException(404, f"no transfer request {request_id}") from None
        except BudgetExhaustedError as exc:
            raise HTTPException(409, str(exc)) from None
        except ReleaseError as exc:
            raise HTTPException(403, str(exc)) from None

    @app.get("/policies/{user_id}", response_model=PolicyOut)
    def get_policy(user_id: str):
        return PolicyOut(**state.policy_store.get(user_id).to_dict())

    @app.put("/policies/{user_id}", response_model=PolicyOut)
    def put_policy(user_id: str, body: PolicyIn):
        doc = {
            "schema_version": 1,
            "user_id": user_id,
            "version": body.version,
            "rules": body.rules,
            "context_rules": [r.model_dump() for r in body.context_rules],
        }
        try:
            policy = ConsentPolicy.from_dict(doc)
            stored = state.policy_store.put(policy, expected_version=body.version)
        except VersionConflictError as exc:
            raise HTTPException(409, str(exc)) from None
        except PolicyError as exc:
            raise HTTPException(422, str(exc)) from None
        return PolicyOut(**stored.to_dict())

    @app.get("/ledger", response_model=list[LedgerEntryOut])
    def ledger_query(
        user: str | None = None,
        kind: str | None = None,
        request_id: str | None = None,
    ):
        try:
            kind_enum = EventKind(kind) if kind else None
        except ValueError:
            raise HTTPException(422, f"unknown event kind {kind!r}") from None
        q = LedgerQuery(user_id=user, kind=kind_enum, request_id=request_id)
        return [
            LedgerEntryOut(index=b.index, hash=b.hash.hex(), event=b.event.to_dict())
            for b in state.ledger.blocks()
            if q.matches(b.event)
        ]

    @app.get("/ledger/verify")
    def ledger_verify():
        bad = state.ledger.verify_chain()
        return {"ok": bad is None, "first_bad_index": bad}

    @app.get("/metrics")
    def metrics():
        return state.metrics_snapshot()

    @app.get("/events")
    def events() -> Response:
        def stream():
            q = state.broker.subscribe()
            try:
                yield ": connected\n\n"
                idle = 0
                while True:
                    try:
                        event = q.get(timeout=SSE_POLL_S)
                        idle = 0
                        yield event.to_sse()
                    except queue.Empty:
                        idle += 1
                        if idle >= SSE_HEARTBEAT_POLLS:
                            idle = 0
                            yield ": heartbeat\n\n"
            finally:
                state.broker.unsubscribe(q)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    if static_dir is not None and static_dir.exists():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
