"""Wearable vitals: simulated streams, CSV ingestion, and preprocessing
(normalization and Kalman smoothing) applied before encryption."""

from petward.telemetry.metrics import (
    CATEGORY_BY_METRIC,
    METRICS,
    PHYSICAL_RANGE,
    Metric,
)
from petward.telemetry.signal import (
    InsufficientDataError,
    SignalConfigError,
    kalman_filter,
    minmax_normalize,
    zscore_normalize,
)
from petward.telemetry.simulate import DeviceProfile, ProfileError, SignalModel, simulate_stream
from petward.telemetry.types import Sample, Window
from petward.telemetry.ingest import IngestReport, RowError, ingest_csv

__all__ = [
    "CATEGORY_BY_METRIC",
    "DeviceProfile",
    "IngestReport",
    "InsufficientDataError",
    "METRICS",
    "Metric",
    "PHYSICAL_RANGE",
    "ProfileError",
    "RowError",
    "Sample",
    "SignalConfigError",
    "SignalModel",
    "Window",
    "ingest_csv",
    "kalman_filter",
    "minmax_normalize",
    "simulate_stream",
    "zscore_normalize",
]
