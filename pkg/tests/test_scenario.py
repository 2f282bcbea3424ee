import pytest

from petward.dp.budget import BudgetExhaustedError
from petward.gateway.config import ScenarioConfig, ScenarioError, apply_overrides
from petward.gateway.pipeline import (
    ReleaseError,
    release_for_analysis,
    run_scenario,
    slot_scale,
    staged_bytes,
)
from petward.he.presets import get_preset
from petward.ledger.events import EventKind
from petward.ledger.logfile import read_blocks
from petward.ledger.chain import verify_blocks
from petward.telemetry.metrics import Metric
from petward.telemetry.signal import kalman_filter
from petward.telemetry.simulate import simulate_stream


def base_doc(**extra):
    doc = {
        "seed": 5,
        "duration_ms": 40_000,
        "he_preset": "desk-wide",
        "devices": [
            {
                "device_id": "dev-1",
                "user_id": "user-1",
                "sampling_period_ms": 1000,
                "metrics": {
                    "heart_rate_bpm": {"baseline": 72, "amplitude": 4, "noise_std": 2.0},
                    "spo2_pct": {"baseline": 97, "noise_std": 0.3},
                },
            }
        ],
        "users": [
            {
                "user_id": "user-1",
                "budget_epsilon": 1.0,
                "policy": {
                    "rules": {
                        "cardiac": {"researcher": "allow", "clinician": "allow", "insurer": "deny"},
                        "respiratory": {"researcher": "ask_user"},
                    }
                },
            }
        ],
    }
    doc.update(extra)
    return doc


ALLOW_REQUEST = {
    "requester": "acme-lab",
    "requester_class": "researcher",
    "user_id": "user-1",
    "categories": ["cardiac"],
    "context": "research",
    "at_ms": 45_000,
    "release": True,
}


class TestTriggerDiscipline:
    def test_ingest_only_scenario_writes_zero_blocks(self, tmp_path):
        config = ScenarioConfig.from_dict(base_doc())
        result = run_scenario(config, run_dir=tmp_path / "run")
        assert result.summary["ledger_blocks"] == 0
        assert result.summary["packets"] > 0
        blocks = read_blocks(tmp_path / "run" / "ledger.petl")
        assert blocks == []

    def test_allowed_transfer_produces_lifecycle_subsequence(self, tmp_path):
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        result = run_scenario(config, run_dir=tmp_path / "run")
        events = result.state.ledger.query(request_id="req-0000")
        kinds = [e.kind for e in events]
        expected_order = [
            EventKind.REQUESTED,
            EventKind.DECIDED,
            EventKind.KEY_RELEASED,
            EventKind.DECRYPTED,
        ]
        positions = [kinds.index(k) for k in expected_order]
        assert positions == sorted(positions)
        assert kinds.count(EventKind.DP_RELEASED) == 1
        decrypted = result.state.ledger.query(kind=EventKind.DECRYPTED)
        assert [e.request_id for e in decrypted] == ["req-0000"]
        assert verify_blocks(read_blocks(tmp_path / "run" / "ledger.petl")) is None

    def test_denied_request_never_decrypts(self):
        request = dict(ALLOW_REQUEST, requester_class="insurer", release=True)
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[request]))
        result = run_scenario(config)
        events = result.state.ledger.query(request_id="req-0000")
        kinds = [e.kind for e in events]
        assert EventKind.DECIDED in kinds
        assert EventKind.DECRYPTED not in kinds
        assert EventKind.KEY_RELEASED not in kinds
        assert result.summary["releases"] == 0


class TestDeterminism:
    def test_same_seed_identical_summary(self, tmp_path):
        doc = base_doc(transfer_requests=[ALLOW_REQUEST])
        first = run_scenario(ScenarioConfig.from_dict(doc), run_dir=tmp_path / "a")
        second = run_scenario(ScenarioConfig.from_dict(doc), run_dir=tmp_path / "b")
        assert first.summary == second.summary

    def test_ledger_chains_are_bit_identical_across_runs(self, tmp_path):
        doc = base_doc(transfer_requests=[ALLOW_REQUEST])
        run_scenario(ScenarioConfig.from_dict(doc), run_dir=tmp_path / "a")
        run_scenario(ScenarioConfig.from_dict(doc), run_dir=tmp_path / "b")
        assert (tmp_path / "a" / "ledger.petl").read_bytes() == (
            tmp_path / "b" / "ledger.petl"
        ).read_bytes()


class TestReleasePaths:
    def test_researcher_gets_dp_mean_only(self):
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        result = run_scenario(config)
        released = result.releases[0]["categories"]["cardiac"]
        assert released["kind"] == "dp_mean"
        assert "values" not in released
        assert released["release"]["epsilon"] == 0.5  # cardiac tier default
        # scale = (hi - lo) / n / epsilon
        assert released["release"]["scale"] == pytest.approx(230 / released["count"] / 0.5)

    def test_clinician_raw_release_matches_smoothed_values(self):
        request = dict(ALLOW_REQUEST, requester_class="clinician")
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[request]))
        result = run_scenario(config)
        released = result.releases[0]["categories"]["cardiac"]
        assert released["kind"] == "raw"
        profile = config.devices[0]
        samples = [
            s for s in simulate_stream(profile, config.duration_ms)
            if s.metric is Metric.HEART_RATE_BPM
        ]
        params = get_preset("desk-wide")
        scale = slot_scale(Metric.HEART_RATE_BPM, params.t)
        values = [s.value for s in samples]
        expected = []
        for i in range(0, len(values), params.n):  # the filter restarts per packet window
            expected.extend(
                round(v * scale) / scale
                for v in kalman_filter(values[i : i + params.n], q=0.01, r=1.0)
            )
        assert released["values"] == pytest.approx(expected)

    def test_dp_mean_near_true_mean(self):
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        result = run_scenario(config)
        released = result.releases[0]["categories"]["cardiac"]
        # noise scale is 230/40/0.5 = 11.5; a 60-sigma-ish excursion means a bug
        assert abs(released["release"]["value"] - 72) < 250

    def test_budget_exhaustion_blocks_before_decryption(self):
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        result = run_scenario(config)
        state = result.state
        state.budgets["user-1"].charge("drain", state.budgets["user-1"].remaining)
        decrypted_before = len(state.ledger.query(kind=EventKind.DECRYPTED))
        with pytest.raises(BudgetExhaustedError):
            release_for_analysis(state, "req-0000")
        assert len(state.ledger.query(kind=EventKind.DECRYPTED)) == decrypted_before

    def test_release_of_non_allowed_request_rejected(self):
        request = dict(ALLOW_REQUEST, requester_class="insurer")
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[request]))
        result = run_scenario(config)
        with pytest.raises(ReleaseError):
            release_for_analysis(result.state, "req-0000")

    def test_ask_user_flow_with_scripted_decision(self):
        request = {
            "requester": "lab-2",
            "requester_class": "researcher",
            "user_id": "user-1",
            "categories": ["respiratory"],
            "context": "research",
            "at_ms": 45_000,
            "user_decision": "allow",
            "release": True,
        }
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[request]))
        result = run_scenario(config)
        events = result.state.ledger.query(request_id="req-0000")
        kinds = [e.kind for e in events]
        assert EventKind.NOTIFIED in kinds
        decided = [e for e in events if e.kind is EventKind.DECIDED]
        assert decided[0].decided_by == "user"
        assert result.summary["releases"] == 1


class TestLedgerCompleteness:
    def test_key_released_count_equals_unwrap_count(self):
        requests = [
            dict(ALLOW_REQUEST, at_ms=45_000),
            {
                "requester": "dr-wu",
                "requester_class": "clinician",
                "user_id": "user-1",
                "categories": ["cardiac", "respiratory"],
                "context": "emergency",
                "at_ms": 50_000,
                "release": True,
            },
        ]
        doc = base_doc(transfer_requests=requests)
        doc["users"][0]["policy"]["rules"]["respiratory"]["clinician"] = "allow"
        result = run_scenario(ScenarioConfig.from_dict(doc))
        key_released = len(result.state.ledger.query(kind=EventKind.KEY_RELEASED))
        assert key_released == result.state.key_service.unwrap_count
        assert key_released == 3  # 1 + 2 categories


class TestRevocation:
    def test_revoked_requester_cannot_release_again(self):
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        result = run_scenario(config)
        state = result.state
        epoch = state.revoke_requester("user-1", "acme-lab")
        assert epoch >= 1
        with pytest.raises(ReleaseError, match="unwrap failed"):
            release_for_analysis(state, "req-0000")
        revoked_events = state.ledger.query(kind=EventKind.REVOKED)
        assert len(revoked_events) == 1
        assert revoked_events[0].detail["requester"] == "acme-lab"


class TestNoPlaintextAtRest:
    def test_run_directory_contains_no_staged_plaintext(self, tmp_path):
        run_dir = tmp_path / "run"
        config = ScenarioConfig.from_dict(base_doc(transfer_requests=[ALLOW_REQUEST]))
        run_scenario(config, run_dir=run_dir)
        params = get_preset("desk-wide")

        needles = []
        profile = config.devices[0]
        for metric in (Metric.HEART_RATE_BPM, Metric.SPO2_PCT):
            samples = [
                s for s in simulate_stream(profile, config.duration_ms) if s.metric is metric
            ]
            values = [s.value for s in samples]
            scale = slot_scale(metric, params.t)
            for i in range(0, len(values), params.n):
                smoothed = kalman_filter(values[i : i + params.n], q=0.01, r=1.0)
                window = [round(v * scale) for v in smoothed]
                if len(window) >= 2:
                    needles.append(bytes(staged_bytes(window)))

        assert needles
        scanned = 0
        for path in run_dir.rglob("*"):
            if not path.is_file():
                continue
            blob = path.read_bytes()
            scanned += 1
            for needle in needles:
                assert needle not in blob, f"plaintext window found in {path}"
        assert scanned > 10  # ledger, manifests, chunks, keys, summary

    def test_key_fixtures_are_present_but_isolated(self, tmp_path):
        run_dir = tmp_path / "run"
        config = ScenarioConfig.from_dict(base_doc())
        run_scenario(config, run_dir=run_dir)
        keys_dir = run_dir / "keys" / "user-1"
        assert (keys_dir / "keyset.bin").exists()
        assert (keys_dir / "tree-secret.bin").exists()


class TestFaultTolerance:
    def test_release_survives_m_node_failures(self):
        doc = base_doc(transfer_requests=[ALLOW_REQUEST])
        doc["fault_plan"] = {"down": ["node-0", "node-3"]}
        result = run_scenario(ScenarioConfig.from_dict(doc))
        assert result.summary["releases"] == 1

    def test_release_survives_one_corrupt_node(self):
        doc = base_doc(transfer_requests=[ALLOW_REQUEST])
        doc["fault_plan"] = {"corrupt": ["node-1"]}
        result = run_scenario(ScenarioConfig.from_dict(doc))
        assert result.summary["releases"] == 1


class TestConfig:
    def test_overrides_apply_dotted_paths(self):
        doc = base_doc()
        apply_overrides(doc, ["stripe.k=5", "duration_ms=20000", "fault_plan.down=[\"node-1\"]"])
        assert doc["stripe"]["k"] == 5
        assert doc["duration_ms"] == 20000
        assert doc["fault_plan"]["down"] == ["node-1"]

    def test_flag_style_overrides_pair_up(self):
        doc = base_doc()
        apply_overrides(doc, ["--stripe.k", "5", "--he_preset", "desk"])
        assert doc["stripe"]["k"] == 5
        assert doc["he_preset"] == "desk"

    def test_bad_override_rejected(self):
        with pytest.raises(ScenarioError):
            apply_overrides(base_doc(), ["no-equals-sign"])

    def test_unknown_user_for_device_rejected(self):
        doc = base_doc()
        doc["devices"][0]["user_id"] = "ghost"
        with pytest.raises(ScenarioError):
            ScenarioConfig.from_dict(doc)

    def test_insufficient_nodes_rejected(self):
        with pytest.raises(ScenarioError):
            ScenarioConfig.from_dict(base_doc(nodes=3))

    def test_dp_tier_override_changes_release_epsilon(self):
        doc = base_doc(transfer_requests=[ALLOW_REQUEST])
        doc["dp_tiers"] = {"category_tiers": {"cardiac": "high"}}  # high tier -> eps 0.1
        result = run_scenario(ScenarioConfig.from_dict(doc))
        released = result.releases[0]["categories"]["cardiac"]
        assert released["release"]["epsilon"] == 0.1
        # a partial override merges onto the defaults
        assert result.state.tiers.default_for("activity") == 1.0

    def test_toy_t_cannot_pack_vitals(self):
        assert slot_scale(Metric.HEART_RATE_BPM, get_preset("desk-wide").t) == 1000
        with pytest.raises(ScenarioError):
            slot_scale(Metric.HEART_RATE_BPM, 97)
        assert slot_scale(Metric.STEPS_COUNT, get_preset("desk-wide").t) == 1
