"""Deterministic simulated wearable devices.

Each metric follows an AR(1) process around its baseline plus an optional
slow sinusoidal swing, clamped to the metric's physical range. The whole
stream is a pure function of (profile, duration): identical seeds
reproduce identical samples bit for bit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from petward import PetwardError
from petward.telemetry.metrics import PHYSICAL_RANGE, Metric
from petward.telemetry.types import Sample

AR_COEFFICIENT = 0.9
SINE_CYCLE_SAMPLES = 240


class ProfileError(PetwardError):
    pass


@dataclass(frozen=True)
class SignalModel:
    baseline: float
    amplitude: float = 0.0
    noise_std: float = 0.0


def _default_models() -> dict[Metric, SignalModel]:
    return {
        Metric.HEART_RATE_BPM: SignalModel(baseline=72.0, amplitude=8.0, noise_std=2.5),
        Metric.SPO2_PCT: SignalModel(baseline=97.0, amplitude=0.5, noise_std=0.4),
    }


@dataclass(frozen=True)
class DeviceProfile:
    device_id: str
    sampling_period_ms: int = 1000
    signal_models: dict[Metric, SignalModel] = field(default_factory=_default_models)
    seed: int = 0
    user_id: str = ""

    def owner(self) -> str:
        return self.user_id or f"user-{self.device_id}"

    def metrics(self) -> list[Metric]:
        return list(self.signal_models)

    def validate(self) -> "DeviceProfile":
        if self.sampling_period_ms <= 0:
            raise ProfileError(f"sampling_period_ms must be positive, got {self.sampling_period_ms}")
        if not self.signal_models:
            raise ProfileError(f"device {self.device_id} emits no metrics")
        for model in self.signal_models.values():
            if model.noise_std < 0:
                raise ProfileError("noise_std must be non-negative")
        return self


def simulate_stream(profile: DeviceProfile, duration_ms: int, start_ms: int = 0) -> list[Sample]:
    """Generate floor(duration / period) samples per metric, time-ordered."""
    profile.validate()
    if duration_ms <= 0:
        raise ProfileError(f"duration_ms must be positive, got {duration_ms}")
    count = duration_ms // profile.sampling_period_ms
    user = profile.owner()
    samples: list[Sample] = []
    for metric, model in sorted(profile.signal_models.items(), key=lambda kv: kv[0].value):
        rng = random.Random(f"{profile.seed}/{profile.device_id}/{metric.value}")
        lo, hi = PHYSICAL_RANGE[metric]
        deviation = 0.0  # AR(1) state around the baseline
        for i in range(count):
            deviation = AR_COEFFICIENT * deviation + rng.gauss(0.0, model.noise_std)
            swing = model.amplitude * math.sin(2 * math.pi * i / SINE_CYCLE_SAMPLES)
            value = min(hi, max(lo, model.baseline + swing + deviation))
            samples.append(
                Sample(
                    device_id=profile.device_id,
                    user_id=user,
                    metric=metric,
                    timestamp_ms=start_ms + i * profile.sampling_period_ms,
                    value=value,
                )
            )
    samples.sort(key=lambda s: (s.timestamp_ms, s.metric.value))
    return samples
