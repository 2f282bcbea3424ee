"""The per-packet pipeline and the scenario runner.

A packet is one batch of up to N slots: consecutive samples of one
metric from one device, Kalman-smoothed, fixed-point encoded into the
plaintext slots of a single ciphertext, then serialized, compressed,
MAC-framed under the category session key, erasure-coded, and placed on
the storage nodes. Raw values exist only in a staging buffer that is
zeroed once the ciphertext exists.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

from petward.consent.requests import ALLOWED
from petward.consent.envelope import EnvelopeUnwrapError
from petward.dataplane.compressors import CODEC_DEFLATE, compress, decompress
from petward.dataplane.framing import frame, unframe
from petward.dataplane.storage import fetch, store
from petward.dp.budget import calibrate_epsilon
from petward.dp.mechanism import privatize_value
from petward.gateway.config import ScenarioConfig, ScenarioError
from petward.gateway.state import GatewayState, PacketRecord
from petward.he.scheme import Ciphertext, decode, decrypt, encode, encrypt, he_add
from petward.he.serialize import deserialize_ciphertext, serialize_ciphertext
from petward.ledger.events import AuditEvent, EventKind
from petward.telemetry.metrics import CATEGORY_BY_METRIC, PHYSICAL_RANGE, Metric
from petward.telemetry.signal import kalman_filter
from petward.telemetry.simulate import simulate_stream
from petward.telemetry.types import Sample

KALMAN_Q = 0.01
KALMAN_R = 1.0


class ReleaseError(ScenarioError):
    pass


def slot_scale(metric: Metric, t: int) -> int:
    """Fixed-point scale for a metric under plaintext modulus t.

    Real-valued vitals use 10^3; integer step counts use 1. The scaled
    physical maximum must fit a slot."""
    scale = 1 if metric is Metric.STEPS_COUNT else 1000
    hi = PHYSICAL_RANGE[metric][1]
    if hi * scale >= t:
        raise ScenarioError(
            f"{metric.value} cannot be packed at scale {scale} under t={t}; "
            "use a wider plaintext modulus preset"
        )
    return scale


def staged_bytes(slots: list[int]) -> bytearray:
    """Canonical staging buffer for a packet's plaintext slots."""
    return bytearray(struct.pack(f"<{len(slots)}q", *slots))


def wipe(buf: bytearray) -> None:
    """Best-effort zeroization of a plaintext staging buffer."""
    for i in range(len(buf)):
        buf[i] = 0


@dataclass
class PacketTiming:
    total_ms: float


def process_window(state: GatewayState, samples: list[Sample]) -> tuple[PacketRecord, PacketTiming]:
    """Run one window of same-metric samples through
    normalize -> encrypt -> frame -> erasure -> store."""
    if not samples:
        raise ScenarioError("empty sample window")
    metric = samples[0].metric
    user_id = samples[0].user_id
    device_id = samples[0].device_id
    category = CATEGORY_BY_METRIC[metric]
    params = state.key_service.params
    scale = slot_scale(metric, params.t)

    t0 = time.perf_counter()
    smoothed = kalman_filter([s.value for s in samples], q=KALMAN_Q, r=KALMAN_R)
    lo, hi = PHYSICAL_RANGE[metric]
    slots = [round(min(hi, max(lo, v)) * scale) for v in smoothed]
    staging = staged_bytes(slots)

    keys = state.key_service.he_keyset(user_id)
    with state.rng_lock:  # rng.gauss is not thread-safe across device pipelines
        ct = encrypt(keys, encode(slots, params), state.rng)
    wipe(staging)
    del slots

    payload = compress(serialize_ciphertext(ct), CODEC_DEFLATE)
    epoch = state.key_service.current_epoch(user_id)
    session_key = state.key_service.session_key(user_id, category, epoch)
    seq = state.next_seq(device_id, metric)
    framed = frame(payload, session_key, seq, codec_id=CODEC_DEFLATE).to_bytes()
    manifest = store(framed, state.config.stripe_k, state.config.stripe_m, state.pool)
    elapsed_ms = (time.perf_counter() - t0) * 1000

    record = PacketRecord(
        manifest=manifest,
        user_id=user_id,
        device_id=device_id,
        metric=metric,
        category=category,
        count=len(samples),
        epoch=epoch,
        seq=seq,
    )
    state.catalog.append(record)
    state.bump("packets")
    state.bump("samples", len(samples))
    return record, PacketTiming(total_ms=elapsed_ms)


def ingest_device(state: GatewayState, samples: list[Sample]) -> list[PacketRecord]:
    """Window a device's sample stream per metric and process each packet."""
    by_metric: dict[Metric, list[Sample]] = {}
    for sample in samples:
        by_metric.setdefault(sample.metric, []).append(sample)
    records = []
    n = state.key_service.params.n
    for metric, metric_samples in by_metric.items():
        metric_samples.sort(key=lambda s: s.timestamp_ms)
        for i in range(0, len(metric_samples), n):
            window = metric_samples[i : i + n]
            try:
                record, _ = process_window(state, window)
            except Exception as exc:
                raise ScenarioError(
                    f"pipeline step failed for device {window[0].device_id} "
                    f"({metric.value}): {exc}"
                ) from exc
            records.append(record)
    return records


def _fetch_ciphertext(state: GatewayState, record: PacketRecord) -> Ciphertext:
    blob = fetch(record.manifest, state.pool)
    session_key = state.key_service.session_key(record.user_id, record.category, record.epoch)
    f = unframe(blob, session_key)
    if f.seq != record.seq:
        raise ReleaseError(f"stored frame sequence {f.seq} does not match record {record.seq}")
    raw = decompress(f.payload, f.codec_id)
    return deserialize_ciphertext(raw, state.key_service.params)


def release_for_analysis(state: GatewayState, request_id: str) -> dict:
    """Execute an allowed transfer: unwrap keys, decrypt, and release.

    Researcher and insurer classes receive only a DP-noised aggregate;
    clinician and self may receive the raw category values. Ledger gets
    KeyReleased / Decrypted (/ DpReleased) events per category.
    """
    request = state.request_store.get(request_id, state.now_ms())
    if request.state != ALLOWED:
        raise ReleaseError(f"request {request_id} is {request.state}, not allowed")
    params = state.key_service.params
    aggregate_only = request.requester_class in ("researcher", "insurer")
    response: dict = {"request_id": request_id, "categories": {}}

    for category in sorted(request.categories):
        records = state.records_for(request.user_id, category)
        if not records:
            raise ReleaseError(f"no stored data for category {category!r} of {request.user_id}")
        if aggregate_only:
            # budget is verified before any key release or decryption
            epsilon = calibrate_epsilon(
                state.tiers.default_for(category),
                state.epsilon_preferences.get(request.user_id),
            )
            state.budget_for(request.user_id).ensure(epsilon)
        try:
            state.key_service.unwrap_for(request.user_id, request.requester, category)
        except EnvelopeUnwrapError:
            raise ReleaseError(f"key envelope unwrap failed for category {category!r}") from None
        state.append_event(
            AuditEvent(
                kind=EventKind.KEY_RELEASED,
                user_id=request.user_id,
                actor=request.requester,
                timestamp_ms=state.now_ms(),
                request_id=request_id,
                categories=frozenset({category}),
                detail={"epoch": str(state.key_service.current_epoch(request.user_id))},
            )
        )

        metric = records[0].metric
        scale = slot_scale(metric, params.t)
        keys = state.key_service.he_keyset(request.user_id)
        total_count = sum(r.count for r in records)

        if aggregate_only:
            # homomorphic sum first: only one (aggregate) ciphertext is decrypted
            acc = None
            for record in records:
                ct = _fetch_ciphertext(state, record)
                acc = ct if acc is None else he_add(acc, ct)
            slot_sums = decode(decrypt(keys, acc), params)
            true_mean = sum(slot_sums) / scale / total_count
            for i in range(len(slot_sums)):
                slot_sums[i] = 0  # zeroization contract
            self_decrypted = 1
        else:
            values: list[float] = []
            for record in records:
                ct = _fetch_ciphertext(state, record)
                slots = decode(decrypt(keys, ct), params)
                values.extend(v / scale for v in slots[: record.count])
                for i in range(len(slots)):
                    slots[i] = 0
            self_decrypted = len(records)

        state.append_event(
            AuditEvent(
                kind=EventKind.DECRYPTED,
                user_id=request.user_id,
                actor=request.requester,
                timestamp_ms=state.now_ms(),
                request_id=request_id,
                categories=frozenset({category}),
                detail={"ciphertexts": str(self_decrypted), "samples": str(total_count)},
            )
        )

        if aggregate_only:
            lo, hi = PHYSICAL_RANGE[metric]
            release = privatize_value(
                true_mean,
                delta=(hi - lo) / total_count,
                epsilon=epsilon,
                budget=state.budget_for(request.user_id),
                rng=state.rng,
                query_desc={"kind": "bounded_mean", "lo": lo, "hi": hi, "n": total_count,
                            "metric": metric.value},
                timestamp_ms=state.now_ms(),
            )
            state.append_event(
                AuditEvent(
                    kind=EventKind.DP_RELEASED,
                    user_id=request.user_id,
                    actor=request.requester,
                    timestamp_ms=state.now_ms(),
                    request_id=request_id,
                    categories=frozenset({category}),
                    detail={
                        "epsilon": str(release.epsilon),
                        "scale": str(release.scale),
                        "budget_remaining": str(release.budget_remaining),
                    },
                )
            )
            response["categories"][category] = {
                "kind": "dp_mean",
                "metric": metric.value,
                "release": release.to_dict(),
                "count": total_count,
            }
        else:
            response["categories"][category] = {
                "kind": "raw",
                "metric": metric.value,
                "values": values,
                "count": total_count,
            }
    state.bump("releases")
    return response


@dataclass
class ScenarioResult:
    summary: dict
    run_dir: Path | None
    releases: list[dict] = field(default_factory=list)
    state: GatewayState | None = None


def run_scenario(config: ScenarioConfig, run_dir: Path | None = None) -> ScenarioResult:
    """Drive a whole scenario under simulated time and persist artifacts."""
    state = GatewayState.build(config, run_dir=run_dir, simulated_time=True)

    for profile in config.devices:
        samples = simulate_stream(profile, config.duration_ms)
        ingest_device(state, samples)
    state.clock.advance_to(config.duration_ms)

    if run_dir is not None:
        manifest_dir = run_dir / "manifests"
        manifest_dir.mkdir(parents=True, exist_ok=True)
        for record in state.catalog:
            path = manifest_dir / f"{record.manifest.object_id}.json"
            path.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True))

    for node_id in config.nodes_down:
        state.pool.node(node_id).down = True
    for node_id in config.nodes_corrupt:
        state.pool.node(node_id).corrupt = True

    releases: list[dict] = []
    for i, script in enumerate(sorted(config.transfer_requests, key=lambda s: s.at_ms)):
        state.clock.advance_to(script.at_ms)
        request = state.create_transfer_request(
            requester=script.requester,
            requester_class=script.requester_class,
            user_id=script.user_id,
            categories=set(script.categories),
            context=script.context,
            request_id=f"req-{i:04d}",
        )
        if request.state == "pending" and script.user_decision:
            request = state.decide_request(request.request_id, script.user_decision, actor=script.user_id)
        if script.release and request.state == ALLOWED:
            releases.append(release_for_analysis(state, request.request_id))

    if run_dir is not None:
        state.key_service.persist_fixtures(run_dir / "keys")

    event_counts: dict[str, int] = {}
    for block in state.ledger.blocks():
        event_counts[block.event.kind.value] = event_counts.get(block.event.kind.value, 0) + 1
    request_states: dict[str, int] = {}
    for stored in state.request_store.all_requests(state.now_ms()):
        request_states[stored.state] = request_states.get(stored.state, 0) + 1
    summary = {
        "devices": len(config.devices),
        "users": len(config.users),
        "samples": state.counters.get("samples", 0),
        "packets": state.counters.get("packets", 0),
        "manifests": len(state.catalog),
        "ledger_blocks": len(state.ledger),
        "events": dict(sorted(event_counts.items())),
        "requests": dict(sorted(request_states.items())),
        "releases": state.counters.get("releases", 0),
        "envelope_unwraps": state.key_service.unwrap_count,
    }
    if run_dir is not None:
        (run_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return ScenarioResult(summary=summary, run_dir=run_dir, releases=releases, state=state)
