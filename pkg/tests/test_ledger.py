import pytest

from petward.ledger import (
    AuditEvent,
    AuditLedger,
    EventKind,
    EventValidationError,
    LedgerFileError,
    LedgerQuery,
    open_ledger,
    read_blocks,
)
from petward.ledger.chain import GENESIS_PREV_HASH, verify_blocks


def ev(kind=EventKind.REQUESTED, request_id="req-1", user="user-1", ts=1000, **kw):
    return AuditEvent(kind=kind, user_id=user, actor="tester", timestamp_ms=ts, request_id=request_id, **kw)


class TestAppend:
    def test_genesis_block(self):
        ledger = AuditLedger()
        block = ledger.append(ev())
        assert block.index == 0
        assert block.prev_hash == GENESIS_PREV_HASH

    def test_chain_structure_over_100_appends(self):
        ledger = AuditLedger()
        blocks = [ledger.append(ev(ts=i)) for i in range(100)]
        assert [b.index for b in blocks] == list(range(100))
        for prev, cur in zip(blocks, blocks[1:]):
            assert cur.prev_hash == prev.hash

    def test_decided_requires_decision_fields(self):
        ledger = AuditLedger()
        with pytest.raises(EventValidationError):
            ledger.append(ev(kind=EventKind.DECIDED))
        assert len(ledger) == 0  # chain untouched on rejection
        ledger.append(ev(kind=EventKind.DECIDED, decision="allow", decided_by="user"))
        assert len(ledger) == 1

    def test_request_id_required_except_revoked(self):
        ledger = AuditLedger()
        with pytest.raises(EventValidationError):
            ledger.append(ev(request_id=""))
        ledger.append(ev(kind=EventKind.REVOKED, request_id="", detail={"leaf": "3"}))
        assert len(ledger) == 1


class TestVerify:
    def test_untampered_1000_block_chain(self):
        ledger = AuditLedger()
        for i in range(1000):
            ledger.append(ev(ts=i, request_id=f"req-{i % 7}"))
        assert ledger.verify_chain() is None

    def test_tampered_event_detected_at_its_index(self):
        ledger = AuditLedger()
        for i in range(1000):
            ledger.append(ev(ts=i))
        blocks = ledger.blocks()
        victim = blocks[500]
        tampered = AuditEvent(
            kind=victim.event.kind,
            user_id="mallory",
            actor=victim.event.actor,
            timestamp_ms=victim.event.timestamp_ms,
            request_id=victim.event.request_id,
        )
        blocks[500] = type(victim)(victim.index, victim.prev_hash, tampered, victim.hash)
        assert verify_blocks(blocks) == 500

    def test_append_only_interface(self):
        ledger = AuditLedger()
        ledger.append(ev())
        public = [n for n in dir(ledger) if not n.startswith("_")]
        assert set(public) <= {"append", "blocks", "query", "verify_chain"}
        # blocks() returns a copy; mutating it cannot touch the chain
        ledger.blocks().clear()
        assert len(ledger) == 1


class TestQuery:
    def test_empty_ledger(self):
        assert AuditLedger().query(LedgerQuery()) == []

    def test_lifecycle_filter_by_request_id(self):
        ledger = AuditLedger()
        ledger.append(ev(kind=EventKind.REQUESTED, request_id="r1", ts=1))
        ledger.append(ev(kind=EventKind.DECIDED, request_id="r1", ts=2, decision="allow", decided_by="user"))
        ledger.append(ev(kind=EventKind.REQUESTED, request_id="r2", ts=3))
        events = ledger.query(request_id="r1")
        assert [e.kind for e in events] == [EventKind.REQUESTED, EventKind.DECIDED]

    def test_filters_compose(self):
        ledger = AuditLedger()
        for i in range(20):
            ledger.append(ev(user=f"user-{i % 2}", ts=i * 10))
        got = ledger.query(user_id="user-1", from_ms=50, to_ms=150)
        assert [e.timestamp_ms for e in got] == [50, 70, 90, 110, 130, 150]

    def test_kind_filter(self):
        ledger = AuditLedger()
        ledger.append(ev(kind=EventKind.REQUESTED))
        ledger.append(ev(kind=EventKind.DECRYPTED))
        ledger.append(ev(kind=EventKind.DECRYPTED))
        assert len(ledger.query(kind=EventKind.DECRYPTED)) == 2


class TestLogFile:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "audit.petl"
        ledger = open_ledger(path)
        for i in range(10):
            ledger.append(ev(ts=i, categories=frozenset({"cardiac"}), detail={"step": str(i)}))
        loaded = read_blocks(path)
        assert len(loaded) == 10
        assert verify_blocks(loaded) is None
        assert loaded[3].event.detail == {"step": "3"}

    def test_reopen_continues_chain(self, tmp_path):
        path = tmp_path / "audit.petl"
        first = open_ledger(path)
        first.append(ev(ts=1))
        second = open_ledger(path)
        block = second.append(ev(ts=2))
        assert block.index == 1
        assert verify_blocks(read_blocks(path)) is None

    def test_magic_enforced(self, tmp_path):
        path = tmp_path / "bogus.petl"
        path.write_bytes(b"NOPE" + bytes(10))
        with pytest.raises(LedgerFileError):
            read_blocks(path)

    def test_exhaustive_single_byte_tamper_on_20_block_chain(self, tmp_path):
        # every single-byte corruption of a persisted chain must be detected,
        # either as a structural parse error or by hash verification
        path = tmp_path / "audit.petl"
        ledger = open_ledger(path)
        for i in range(20):
            ledger.append(ev(ts=i, request_id=f"req-{i}", detail={"n": str(i)}))
        original = path.read_bytes()
        detected = 0
        total = 0
        for pos in range(len(original)):
            mutated = bytearray(original)
            mutated[pos] ^= 0x01
            path.write_bytes(bytes(mutated))
            total += 1
            try:
                blocks = read_blocks(path)
            except LedgerFileError:
                detected += 1
                continue
            if verify_blocks(blocks) is not None or len(blocks) != 20:
                detected += 1
        assert detected == total


class TestConcurrency:
    def test_verify_runs_against_a_consistent_snapshot_during_appends(self):
        import threading

        ledger = AuditLedger()
        failures = []

        def writer():
            for i in range(300):
                ledger.append(ev(ts=i))

        def verifier():
            for _ in range(100):
                if ledger.verify_chain() is not None:
                    failures.append("verify failed mid-append")

        threads = [threading.Thread(target=writer), threading.Thread(target=verifier)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert failures == []
        assert ledger.verify_chain() is None and len(ledger) == 300


class TestCanonicalEncoding:
    def test_roundtrip_preserves_all_fields(self):
        event = AuditEvent(
            kind=EventKind.DECIDED,
            user_id="user-9",
            actor="user-9",
            timestamp_ms=123456,
            request_id="req-77",
            categories=frozenset({"cardiac", "activity"}),
            decision="deny",
            decided_by="policy",
            detail={"reason": "static rule", "rule": "insurer/cardiac"},
        )
        assert AuditEvent.from_canonical(event.canonical_bytes()) == event

    def test_encoding_is_order_independent_for_sets_and_maps(self):
        a = ev(categories=frozenset({"x", "y"}), detail={"k1": "v1", "k2": "v2"})
        b = ev(categories=frozenset({"y", "x"}), detail={"k2": "v2", "k1": "v1"})
        assert a.canonical_bytes() == b.canonical_bytes()
