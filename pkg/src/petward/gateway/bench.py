"""Benchmark harness: per-packet pipeline latency and throughput.

Measures only the per-packet path (normalize -> encrypt -> frame ->
erasure -> store); per-query work (MPC, DP) is not part of packet cost.
Storage nodes are memory-backed so the figures reflect compute, and
resource figures (peak RSS, CPU) are best-effort.
"""

from __future__ import annotations

import json
import os
import resource
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from petward.gateway.config import ScenarioConfig, ScenarioError, UserSpec
from petward.gateway.pipeline import ingest_device
from petward.gateway.state import GatewayState
from petward.telemetry.metrics import Metric
from petward.telemetry.simulate import DeviceProfile, SignalModel, simulate_stream

BENCH_PERIOD_MS = 100


@dataclass(frozen=True)
class BenchReport:
    device_count: int
    packets: int
    samples: int
    median_latency_ms: float
    p95_latency_ms: float
    per_device_throughput_pps: float
    total_throughput_pps: float
    peak_memory_bytes: int
    cpu_utilization_pct: float
    wall_time_s: float

    def __post_init__(self):
        assert self.p95_latency_ms >= self.median_latency_ms

    def to_dict(self) -> dict:
        return {
            "device_count": self.device_count,
            "packets": self.packets,
            "samples": self.samples,
            "median_latency_ms": self.median_latency_ms,
            "p95_latency_ms": self.p95_latency_ms,
            "per_device_throughput_pps": self.per_device_throughput_pps,
            "total_throughput_pps": self.total_throughput_pps,
            "peak_memory_bytes": self.peak_memory_bytes,
            "cpu_utilization_pct": self.cpu_utilization_pct,
            "wall_time_s": self.wall_time_s,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def throughput_degradation_pct(baseline: BenchReport, loaded: BenchReport) -> float:
    """Drop in total packet-processing rate from baseline to loaded, in
    percent. On one host the aggregate rate is the scaling signal;
    per-device figures fall 1/devices by construction."""
    if baseline.total_throughput_pps <= 0:
        return 0.0
    drop = baseline.total_throughput_pps - loaded.total_throughput_pps
    return 100.0 * drop / baseline.total_throughput_pps


def _bench_config(devices: int, he_preset: str, seed: int, duration_ms: int) -> ScenarioConfig:
    profiles = [
        DeviceProfile(
            device_id=f"bench-dev-{i}",
            sampling_period_ms=BENCH_PERIOD_MS,
            signal_models={Metric.HEART_RATE_BPM: SignalModel(72.0, 4.0, 2.0)},
            seed=seed + i,
            user_id=f"bench-user-{i}",
        )
        for i in range(devices)
    ]
    users = [UserSpec(user_id=f"bench-user-{i}") for i in range(devices)]
    return ScenarioConfig(
        seed=seed,
        duration_ms=duration_ms,
        he_preset=he_preset,
        devices=profiles,
        users=users,
    )


def bench(
    devices: int,
    duration_ms: int = 10_000,
    he_preset: str = "desk-wide",
    seed: int = 0,
) -> BenchReport:
    if devices < 1:
        raise ScenarioError(f"need at least one device, got {devices}")
    if duration_ms <= 0:
        raise ScenarioError(f"duration_ms must be positive, got {duration_ms}")
    config = _bench_config(devices, he_preset, seed, duration_ms)
    state = GatewayState.build(config, run_dir=None, simulated_time=True)

    streams = [simulate_stream(profile, duration_ms) for profile in config.devices]
    for profile in config.devices:
        state.key_service.user(profile.owner())  # key setup is not packet cost

    def run_stream(samples) -> tuple[float, int]:
        t0 = time.perf_counter()
        produced = len(ingest_device(state, samples))
        return (time.perf_counter() - t0) * 1000, produced

    latencies: list[float] = []
    cpu_before = os.times()
    wall_start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=min(8, devices)) as executor:
        for elapsed_ms, produced in executor.map(run_stream, streams):
            if produced:
                latencies.extend([elapsed_ms / produced] * produced)
    wall = time.perf_counter() - wall_start
    cpu_after = os.times()
    cpu_used = (cpu_after.user - cpu_before.user) + (cpu_after.system - cpu_before.system)

    packets = state.counters.get("packets", 0)
    return BenchReport(
        device_count=devices,
        packets=packets,
        samples=state.counters.get("samples", 0),
        median_latency_ms=round(statistics.median(latencies), 4),
        p95_latency_ms=round(_quantile(latencies, 0.95), 4),
        per_device_throughput_pps=round(packets / wall / devices, 3) if wall else 0.0,
        total_throughput_pps=round(packets / wall, 3) if wall else 0.0,
        peak_memory_bytes=resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024,
        cpu_utilization_pct=round(100.0 * cpu_used / wall, 2) if wall else 0.0,
        wall_time_s=round(wall, 4),
    )


def _quantile(values: list[float], q: float) -> float:
    ordered = sorted(values)
    index = min(len(ordered) - 1, max(0, round(q * (len(ordered) - 1))))
    return ordered[index]
