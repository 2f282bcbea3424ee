"""Laplace mechanism and the release path that debits the budget."""

from __future__ import annotations

import math
import random
import uuid
from dataclasses import dataclass

from petward import PetwardError
from petward.dp.budget import PrivacyBudget
from petward.dp.queries import Query, QueryKind, sensitivity, true_answer


class DpParameterError(PetwardError):
    pass


def laplace_sample(scale: float, rng: random.Random) -> float:
    """Laplace(0, scale) via the inverse CDF:
    -scale * sign(u - 1/2) * ln(1 - 2|u - 1/2|) for uniform u in (0, 1)."""
    if scale <= 0:
        raise DpParameterError(f"laplace scale must be positive, got {scale}")
    u = rng.random()
    while 1.0 - 2.0 * abs(u - 0.5) <= 0.0:  # u == 0 would blow up the log
        u = rng.random()
    centered = u - 0.5
    return -scale * math.copysign(1.0, centered) * math.log(1.0 - 2.0 * abs(centered))


@dataclass(frozen=True)
class NoisyRelease:
    release_id: str
    query: dict
    epsilon: float
    scale: float  # the Laplace b actually used; test hook for scale == delta/epsilon
    value: float | list[float]
    timestamp_ms: int
    budget_remaining: float

    def to_dict(self) -> dict:
        return {
            "release_id": self.release_id,
            "query": self.query,
            "epsilon": self.epsilon,
            "scale": self.scale,
            "value": self.value,
            "timestamp_ms": self.timestamp_ms,
            "budget_remaining": self.budget_remaining,
        }


def privatize(
    q: Query,
    data: list[float],
    epsilon: float,
    budget: PrivacyBudget,
    rng: random.Random,
    timestamp_ms: int = 0,
) -> NoisyRelease:
    """Release the query answer with Laplace(delta/epsilon) noise per scalar.

    The budget is debited exactly once per call (a histogram counts as a
    single epsilon under L1 accounting); if the charge fails nothing is
    computed and nothing is debited.
    """
    if epsilon <= 0:
        raise DpParameterError(f"epsilon must be positive, got {epsilon}")
    delta = sensitivity(q)
    release_id = str(uuid.uuid4())
    budget.charge(release_id, epsilon)  # raises BudgetExhaustedError before any release
    scale = delta / epsilon
    answer = true_answer(q, data)
    if q.kind is QueryKind.HISTOGRAM:
        noisy: float | list[float] = [c + laplace_sample(scale, rng) for c in answer]
    else:
        noisy = answer + laplace_sample(scale, rng)
    return NoisyRelease(
        release_id=release_id,
        query=q.describe(),
        epsilon=epsilon,
        scale=scale,
        value=noisy,
        timestamp_ms=timestamp_ms,
        budget_remaining=budget.remaining,
    )


def privatize_value(
    value: float,
    delta: float,
    epsilon: float,
    budget: PrivacyBudget,
    rng: random.Random,
    query_desc: dict,
    timestamp_ms: int = 0,
) -> NoisyRelease:
    """Like privatize, for an already-computed true answer (e.g. an
    aggregate decrypted from ciphertexts) with caller-supplied sensitivity."""
    if epsilon <= 0:
        raise DpParameterError(f"epsilon must be positive, got {epsilon}")
    if delta <= 0:
        raise DpParameterError(f"sensitivity must be positive, got {delta}")
    release_id = str(uuid.uuid4())
    budget.charge(release_id, epsilon)
    scale = delta / epsilon
    return NoisyRelease(
        release_id=release_id,
        query=dict(query_desc),
        epsilon=epsilon,
        scale=scale,
        value=value + laplace_sample(scale, rng),
        timestamp_ms=timestamp_ms,
        budget_remaining=budget.remaining,
    )
