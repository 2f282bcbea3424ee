"""Vital-sign metrics: physical ranges and consent data categories."""

from __future__ import annotations

import enum


class Metric(str, enum.Enum):
    HEART_RATE_BPM = "heart_rate_bpm"
    GLUCOSE_MG_DL = "glucose_mg_dl"
    TEMPERATURE_C = "temperature_c"
    SPO2_PCT = "spo2_pct"
    STEPS_COUNT = "steps_count"


METRICS = tuple(Metric)

# Declared physical ranges; ingestion rejects values outside them and the
# simulator clamps to them.
PHYSICAL_RANGE: dict[Metric, tuple[float, float]] = {
    Metric.HEART_RATE_BPM: (20.0, 250.0),
    Metric.GLUCOSE_MG_DL: (40.0, 500.0),
    Metric.TEMPERATURE_C: (30.0, 45.0),
    Metric.SPO2_PCT: (50.0, 100.0),
    Metric.STEPS_COUNT: (0.0, 100_000.0),
}

# Consent data-category tag per metric (see petward.consent).
CATEGORY_BY_METRIC: dict[Metric, str] = {
    Metric.HEART_RATE_BPM: "cardiac",
    Metric.GLUCOSE_MG_DL: "metabolic",
    Metric.TEMPERATURE_C: "temperature",
    Metric.SPO2_PCT: "respiratory",
    Metric.STEPS_COUNT: "activity",
}

CATEGORIES = tuple(sorted(set(CATEGORY_BY_METRIC.values())))
