"""Supported query shapes and their L1 sensitivities."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from petward import PetwardError


class QueryKind(str, enum.Enum):
    COUNT = "count"
    BOUNDED_SUM = "bounded_sum"
    BOUNDED_MEAN = "bounded_mean"
    HISTOGRAM = "histogram"


class UnsupportedQueryError(PetwardError):
    pass


@dataclass(frozen=True)
class Query:
    kind: QueryKind
    lo: float | None = None
    hi: float | None = None
    n: int | None = None  # fixed denominator for bounded_mean
    bucket_edges: tuple[float, ...] = ()

    def validate(self) -> "Query":
        if self.kind in (QueryKind.BOUNDED_SUM, QueryKind.BOUNDED_MEAN):
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise UnsupportedQueryError(
                    f"{self.kind.value} requires bounds lo < hi, got [{self.lo}, {self.hi}]"
                )
        if self.kind is QueryKind.BOUNDED_MEAN and (self.n is None or self.n < 1):
            raise UnsupportedQueryError("bounded_mean requires a fixed n >= 1")
        if self.kind is QueryKind.HISTOGRAM:
            edges = self.bucket_edges
            if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
                raise UnsupportedQueryError("histogram requires strictly increasing bucket edges")
        return self

    def describe(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.lo is not None:
            out["lo"] = self.lo
        if self.hi is not None:
            out["hi"] = self.hi
        if self.n is not None:
            out["n"] = self.n
        if self.bucket_edges:
            out["bucket_edges"] = list(self.bucket_edges)
        return out


def sensitivity(q: Query) -> float:
    """L1 sensitivity of one record's presence.

    Histogram releases are accounted in L1: one record moves one bucket
    count, so every bucket is released with Laplace noise at delta 1
    under a single epsilon charge.
    """
    q.validate()
    if q.kind is QueryKind.COUNT:
        return 1.0
    if q.kind is QueryKind.BOUNDED_SUM:
        return q.hi - q.lo
    if q.kind is QueryKind.BOUNDED_MEAN:
        return (q.hi - q.lo) / q.n
    if q.kind is QueryKind.HISTOGRAM:
        return 1.0
    raise UnsupportedQueryError(f"unsupported query kind {q.kind}")


def true_answer(q: Query, data: list[float]) -> float | list[float]:
    """Exact (pre-noise) answer; clipping enforces the declared bounds."""
    q.validate()
    if q.kind is QueryKind.COUNT:
        return float(len(data))
    if q.kind is QueryKind.BOUNDED_SUM:
        return float(sum(min(q.hi, max(q.lo, x)) for x in data))
    if q.kind is QueryKind.BOUNDED_MEAN:
        return float(sum(min(q.hi, max(q.lo, x)) for x in data)) / q.n
    if q.kind is QueryKind.HISTOGRAM:
        edges = q.bucket_edges
        counts = [0.0] * (len(edges) - 1)
        for x in data:
            if edges[0] <= x < edges[-1]:
                for i in range(len(counts)):
                    if edges[i] <= x < edges[i + 1]:
                        counts[i] += 1
                        break
            elif x == edges[-1]:  # closed top edge
                counts[-1] += 1
        return counts
    raise UnsupportedQueryError(f"unsupported query kind {q.kind}")
