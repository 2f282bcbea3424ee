"""Preprocessing for vitals windows: normalization and scalar Kalman smoothing."""

from __future__ import annotations

import math
from typing import Sequence

from petward import PetwardError
from petward.telemetry.types import Window

_DEGENERATE_STD = 1e-12


class SignalConfigError(PetwardError):
    pass


class InsufficientDataError(PetwardError):
    pass


def _window_values(w: Window | Sequence[float]) -> list[float]:
    if isinstance(w, Window):
        return w.values()
    return list(w)


def zscore_normalize(w: Window | Sequence[float]) -> list[float]:
    """(x - mean) / s with the n-1 sample standard deviation.

    A window with s below 1e-12 normalizes to all zeros.
    """
    xs = _window_values(w)
    n = len(xs)
    if n < 2:
        raise InsufficientDataError(f"z-score needs at least 2 samples, got {n}")
    mean = sum(xs) / n
    var = sum((x - mean) ** 2 for x in xs) / (n - 1)
    s = math.sqrt(var)
    if s < _DEGENERATE_STD:
        return [0.0] * n
    return [(x - mean) / s for x in xs]


def minmax_normalize(w: Window | Sequence[float]) -> list[float]:
    """Scale into [0, 1]; a constant window maps to all 0.5."""
    xs = _window_values(w)
    if not xs:
        raise InsufficientDataError("min-max scaling needs at least 1 sample")
    lo, hi = min(xs), max(xs)
    if hi == lo:
        return [0.5] * len(xs)
    span = hi - lo
    return [(x - lo) / span for x in xs]


def kalman_filter(series: Sequence[float], q: float = 0.01, r: float = 1.0) -> list[float]:
    """Constant-state scalar Kalman recursion over a measurement series.

    Warm start: estimate = first measurement, covariance = r. With r = 0
    the gain is pinned to 1 and the output equals the input.
    """
    if not series:
        raise InsufficientDataError("kalman filter needs a non-empty series")
    if q < 0 or r < 0:
        raise SignalConfigError(f"variances must be non-negative, got q={q}, r={r}")
    estimate = float(series[0])
    cov = r
    out = [estimate]
    for z in series[1:]:
        cov += q
        gain = 1.0 if cov + r == 0 else cov / (cov + r)
        estimate += gain * (z - estimate)
        cov *= 1.0 - gain
        out.append(estimate)
    return out
