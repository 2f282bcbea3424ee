"""Command-line entry points. Batch commands call the core library; the
``serve`` command launches the HTTP gateway."""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click



@click.group()
def main():
    """Privacy-preserving wearable telemetry pipeline."""


@main.command()
@click.option("--port", default=8400, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Scenario config supplying users, policies, and devices.")
@click.option("--demo", is_flag=True, help="Seed two demo users with data and policies.")
@click.option("--static-dir", type=click.Path(), default=None,
              help="Dashboard bundle directory to serve at /.")
def serve(port, host, config_path, demo, static_dir):
    """Run the gateway API (JSON + server-sent events)."""
    import uvicorn

    from petward.gateway.api import create_app
    from petward.gateway.config import ScenarioConfig
    from petward.gateway.pipeline import ingest_device
    from petward.gateway.state import GatewayState
    from petward.telemetry.simulate import simulate_stream

    if config_path:
        config = ScenarioConfig.from_file(config_path)
    elif demo:
        config = ScenarioConfig.from_dict(_demo_config())
    else:
        config = ScenarioConfig.from_dict({"users": [{"user_id": "user-1"}]})
    state = GatewayState.build(config, run_dir=None, simulated_time=False)
    for profile in config.devices:
        ingest_device(state, simulate_stream(profile, config.duration_ms))
    bundle = Path(static_dir) if static_dir else _default_bundle_dir()
    app = create_app(state, static_dir=bundle)
    click.echo(f"gateway listening on http://{host}:{port} (users: "
               f"{', '.join(u.user_id for u in config.users)})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command(context_settings={"ignore_unknown_options": True})
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), default="runs/latest", show_default=True)
@click.argument("overrides", nargs=-1, type=click.UNPROCESSED)
def run(config_path, out_dir, overrides):
    """Run a scenario end to end; OVERRIDES are dotted key=value pairs."""
    from petward.gateway.config import ScenarioConfig, apply_overrides
    from petward.gateway.pipeline import run_scenario

    doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    apply_overrides(doc, [o for o in overrides if o])
    config = ScenarioConfig.from_dict(doc)
    result = run_scenario(config, run_dir=Path(out_dir))
    click.echo(json.dumps(result.summary, indent=2, sort_keys=True))


@main.command(context_settings={"ignore_unknown_options": True})
@click.option("--devices", default=1, show_default=True)
@click.option("--duration", default=10.0, show_default=True, help="Simulated seconds per device.")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--he-preset", default="desk-wide", show_default=True)
@click.option("--seed", default=0, show_default=True)
def bench(devices, duration, out_path, he_preset, seed):
    """Measure per-packet pipeline latency and throughput."""
    from petward.gateway.bench import bench as run_bench

    report = run_bench(devices, duration_ms=int(duration * 1000), he_preset=he_preset, seed=seed)
    text = report.to_json()
    if out_path:
        Path(out_path).write_text(text)
    click.echo(text)


@main.command("verify-ledger")
@click.argument("ledger_file", type=click.Path(exists=True))
def verify_ledger(ledger_file):
    """Verify every hash link of a persisted ledger file."""
    from petward.ledger.chain import verify_blocks
    from petward.ledger.logfile import LedgerFileError, read_blocks

    try:
        blocks = read_blocks(Path(ledger_file))
    except LedgerFileError as exc:
        click.echo(f"FAIL: {exc}")
        sys.exit(1)
    bad = verify_blocks(blocks)
    if bad is None:
        click.echo(f"ok: {len(blocks)} blocks verified")
    else:
        click.echo(f"FAIL: first bad block at index {bad}")
        sys.exit(1)


@main.command()
@click.option("--preset", default="desk", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the serialized keyset here.")
def keygen(preset, seed, out_path):
    """Generate a keyset and report its parameters and sizes."""
    from petward.he import get_preset, keygen as he_keygen, serialize_keyset

    params = get_preset(preset)
    keys = he_keygen(params, seed)
    blob = serialize_keyset(keys)
    info = params.describe()
    info["serialized_keyset_bytes"] = len(blob)
    if info["security_note"]:
        click.echo(f"*** {info['security_note']} ***", err=True)
    if out_path:
        Path(out_path).write_bytes(blob)
        info["written_to"] = out_path
    click.echo(json.dumps(info, indent=2, sort_keys=True))


@main.command()
@click.option("--csv", "csv_path", type=click.Path(exists=True), required=True)
def ingest(csv_path):
    """Validate a vitals CSV; report accepted rows and line-numbered rejects."""
    from petward.telemetry.ingest import IngestError, ingest_csv

    try:
        report = ingest_csv(Path(csv_path))
    except IngestError as exc:
        click.echo(f"FAIL: {exc}")
        sys.exit(1)
    click.echo(
        json.dumps(
            {
                "accepted": report.accepted,
                "rejected": report.rejected,
                "errors": [{"line": e.line, "reason": e.reason} for e in report.errors],
            },
            indent=2,
        )
    )
    if report.errors:
        sys.exit(2)


@main.command("mpc-demo")
@click.option("--parties", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--transcript", "transcript_path", type=click.Path(), default=None,
              help="Write the JSONL round transcript here.")
def mpc_demo(parties, seed, transcript_path):
    """Jointly average per-party heart rates without revealing any input."""
    from petward.mpc import dealer_setup, decode_fixed, encode_fixed, secure_aggregate

    rng = random.Random(seed)
    ctx = dealer_setup(parties, seed=seed)
    rates = [round(rng.uniform(60, 90), 1) for _ in range(parties)]
    inputs = [encode_fixed(r, ctx.p) for r in rates]
    total, session = secure_aggregate(ctx, inputs, "mean_numerator", rng)
    mean = decode_fixed(total, ctx.p) / parties
    click.echo(json.dumps({
        "parties": parties,
        "private_inputs": rates,
        "joint_mean": round(mean, 4),
        "rounds": session.bus.current_round,
        "messages": len(session.bus.records),
    }, indent=2))
    if transcript_path:
        Path(transcript_path).write_text(session.bus.transcript_jsonl() + "\n")
        click.echo(f"transcript written to {transcript_path}", err=True)


def _default_bundle_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.exists() else None


def _demo_config() -> dict:
    return {
        "seed": 11,
        "duration_ms": 120_000,
        "he_preset": "desk-wide",
        "devices": [
            {
                "device_id": "watch-ada",
                "user_id": "ada",
                "sampling_period_ms": 1000,
                "metrics": {
                    "heart_rate_bpm": {"baseline": 71, "amplitude": 6, "noise_std": 2.0},
                    "spo2_pct": {"baseline": 97, "noise_std": 0.3},
                },
            },
            {
                "device_id": "cgm-bo",
                "user_id": "bo",
                "sampling_period_ms": 2000,
                "metrics": {"glucose_mg_dl": {"baseline": 104, "amplitude": 12, "noise_std": 4.0}},
            },
        ],
        "users": [
            {
                "user_id": "ada",
                "budget_epsilon": 1.0,
                "policy": {
                    "rules": {
                        "cardiac": {"researcher": "ask_user", "clinician": "allow"},
                        "respiratory": {"researcher": "ask_user"},
                    },
                    "context_rules": [
                        {"priority": 1, "effect": "allow", "recipient_class": "clinician",
                         "context": "emergency"}
                    ],
                },
            },
            {
                "user_id": "bo",
                "budget_epsilon": 1.0,
                "policy": {"rules": {"metabolic": {"clinician": "ask_user", "insurer": "deny"}}},
            },
        ],
    }


if __name__ == "__main__":
    main()
