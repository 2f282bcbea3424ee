"""CSV ingestion of vitals rows.

Expected header: ``device_id,user_id,metric,timestamp_ms,value``. Rows are
validated one by one; bad rows are reported with their line number and
never abort the rest of the file.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from petward import PetwardError
from petward.telemetry.metrics import PHYSICAL_RANGE, Metric
from petward.telemetry.types import Sample

EXPECTED_HEADER = ["device_id", "user_id", "metric", "timestamp_ms", "value"]


class IngestError(PetwardError):
    pass


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass
class IngestReport:
    samples: list[Sample] = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return len(self.samples)

    @property
    def rejected(self) -> int:
        return len(self.errors)


def ingest_csv(source: str | Path | io.TextIOBase) -> IngestReport:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return _ingest(fh)
    return _ingest(source)


def _ingest(fh) -> IngestReport:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty CSV: missing header") from None
    if [h.strip() for h in header] != EXPECTED_HEADER:
        raise IngestError(f"bad header {header!r}; expected {EXPECTED_HEADER}")

    report = IngestReport()
    last_ts: dict[tuple[str, Metric], int] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(EXPECTED_HEADER):
            report.errors.append(RowError(line, f"expected {len(EXPECTED_HEADER)} fields, got {len(row)}"))
            continue
        device_id, user_id, metric_raw, ts_raw, value_raw = (cell.strip() for cell in row)
        try:
            metric = Metric(metric_raw)
        except ValueError:
            report.errors.append(RowError(line, f"unknown metric {metric_raw!r}"))
            continue
        try:
            timestamp_ms = int(ts_raw)
        except ValueError:
            report.errors.append(RowError(line, f"timestamp_ms {ts_raw!r} is not an integer"))
            continue
        try:
            value = float(value_raw)
        except ValueError:
            report.errors.append(RowError(line, f"value {value_raw!r} is not a number"))
            continue
        lo, hi = PHYSICAL_RANGE[metric]
        if not lo <= value <= hi:
            report.errors.append(
                RowError(line, f"{metric.value} value {value} outside physical range [{lo}, {hi}]")
            )
            continue
        key = (device_id, metric)
        if key in last_ts and timestamp_ms <= last_ts[key]:
            report.errors.append(
                RowError(line, f"timestamp {timestamp_ms} does not advance past {last_ts[key]} for {device_id}/{metric.value}")
            )
            continue
        last_ts[key] = timestamp_ms
        report.samples.append(Sample(device_id, user_id, metric, timestamp_ms, value))
    return report
