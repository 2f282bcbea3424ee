import json

from click.testing import CliRunner

from petward.cli import main


def invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


CONFIG_DOC = {
    "seed": 2,
    "duration_ms": 20_000,
    "he_preset": "desk-wide",
    "devices": [
        {
            "device_id": "dev-1",
            "user_id": "user-1",
            "sampling_period_ms": 1000,
            "metrics": {"heart_rate_bpm": {"baseline": 70, "noise_std": 1.0}},
        }
    ],
    "users": [{"user_id": "user-1"}],
}


class TestKeygen:
    def test_reports_modulus_bits_and_sizes(self, tmp_path):
        out = tmp_path / "keys.bin"
        result = invoke("keygen", "--preset", "desk", "--out", str(out))
        assert result.exit_code == 0
        # the NOT-SECURE banner goes to stderr; CliRunner interleaves streams
        info = json.loads(result.output[result.output.index("{"):])
        assert info["total_modulus_bits"] > 180
        assert info["serialized_keyset_bytes"] == out.stat().st_size
        assert "NOT SECURE" in info["security_note"]


class TestIngestCommand:
    def test_valid_csv(self, tmp_path):
        csv = tmp_path / "vitals.csv"
        csv.write_text(
            "device_id,user_id,metric,timestamp_ms,value\n"
            "d1,u1,heart_rate_bpm,1000,70\n"
            "d1,u1,heart_rate_bpm,2000,71\n"
        )
        result = invoke("ingest", "--csv", str(csv))
        assert result.exit_code == 0
        assert json.loads(result.output)["accepted"] == 2

    def test_bad_rows_exit_code(self, tmp_path):
        csv = tmp_path / "vitals.csv"
        csv.write_text(
            "device_id,user_id,metric,timestamp_ms,value\nd1,u1,heart_rate_bpm,1000,999\n"
        )
        result = invoke("ingest", "--csv", str(csv))
        assert result.exit_code == 2
        report = json.loads(result.output)
        assert report["errors"][0]["line"] == 2


class TestRunCommand:
    def test_run_with_overrides(self, tmp_path):
        config = tmp_path / "scenario.json"
        config.write_text(json.dumps(CONFIG_DOC))
        out_dir = tmp_path / "run"
        result = invoke(
            "run", "--config", str(config), "--out", str(out_dir), "duration_ms=10000"
        )
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert summary["samples"] == 10  # override took effect
        assert (out_dir / "ledger.petl").exists()
        assert (out_dir / "summary.json").exists()


class TestVerifyLedgerCommand:
    def test_ok_and_tampered(self, tmp_path):
        config = tmp_path / "scenario.json"
        doc = dict(CONFIG_DOC)
        doc["transfer_requests"] = [
            {
                "requester": "lab",
                "requester_class": "researcher",
                "user_id": "user-1",
                "categories": ["cardiac"],
                "at_ms": 30_000,
            }
        ]
        doc["users"] = [
            {
                "user_id": "user-1",
                "policy": {"rules": {"cardiac": {"researcher": "allow"}}},
            }
        ]
        config.write_text(json.dumps(doc))
        out_dir = tmp_path / "run"
        invoke("run", "--config", str(config), "--out", str(out_dir))
        ledger = out_dir / "ledger.petl"
        ok = invoke("verify-ledger", str(ledger))
        assert ok.exit_code == 0 and "ok" in ok.output

        blob = bytearray(ledger.read_bytes())
        blob[60] ^= 0x01
        ledger.write_bytes(bytes(blob))
        bad = invoke("verify-ledger", str(ledger))
        assert bad.exit_code == 1


class TestBenchCommand:
    def test_bench_writes_report(self, tmp_path):
        out = tmp_path / "bench.json"
        result = invoke("bench", "--devices", "1", "--duration", "3", "--out", str(out))
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert report["device_count"] == 1
        assert report["packets"] > 0
        assert report["p95_latency_ms"] >= report["median_latency_ms"]

    def test_zero_devices_rejected(self):
        result = CliRunner().invoke(main, ["bench", "--devices", "0"])
        assert result.exit_code != 0


class TestMpcDemoCommand:
    def test_demo_runs_and_dumps_transcript(self, tmp_path):
        transcript = tmp_path / "transcript.jsonl"
        result = invoke("mpc-demo", "--parties", "3", "--transcript", str(transcript))
        assert result.exit_code == 0
        body = json.loads(result.output.split("transcript written")[0])
        assert body["parties"] == 3
        lines = transcript.read_text().strip().splitlines()
        assert all(set(json.loads(l)) == {"round", "from", "to", "kind", "payload_hash"} for l in lines)
