"""Core telemetry records."""

from __future__ import annotations

from dataclasses import dataclass, field

from petward import PetwardError
from petward.telemetry.metrics import CATEGORY_BY_METRIC, PHYSICAL_RANGE, Metric


class SampleError(PetwardError):
    pass


@dataclass(frozen=True)
class Sample:
    """One timestamped vital-sign reading from a (simulated) device."""

    device_id: str
    user_id: str
    metric: Metric
    timestamp_ms: int
    value: float

    @property
    def category(self) -> str:
        return CATEGORY_BY_METRIC[self.metric]

    def validate(self) -> "Sample":
        lo, hi = PHYSICAL_RANGE[self.metric]
        if not lo <= self.value <= hi:
            raise SampleError(
                f"{self.metric.value} value {self.value} outside physical range [{lo}, {hi}]"
            )
        return self


@dataclass
class Window:
    """Ordered samples of one metric with monotone timestamps."""

    metric: Metric
    samples: list[Sample] = field(default_factory=list)

    def __post_init__(self):
        last = None
        for s in self.samples:
            if s.metric != self.metric:
                raise SampleError(f"window of {self.metric.value} got a {s.metric.value} sample")
            if last is not None and s.timestamp_ms <= last:
                raise SampleError("window timestamps must strictly increase")
            last = s.timestamp_ms

    def values(self) -> list[float]:
        return [s.value for s in self.samples]

    def __len__(self) -> int:
        return len(self.samples)
