"""End-to-end orchestration: the ingest -> preprocess -> encrypt -> frame
-> store pipeline, the transfer-request/consent/key-release/DP-release
flow, the HTTP+SSE API, and the benchmark harness."""

from petward.gateway.config import ScenarioConfig, ScenarioError
from petward.gateway.state import GatewayState
from petward.gateway.pipeline import run_scenario, release_for_analysis
from petward.gateway.bench import BenchReport, bench

__all__ = [
    "BenchReport",
    "GatewayState",
    "ScenarioConfig",
    "ScenarioError",
    "bench",
    "release_for_analysis",
    "run_scenario",
]
