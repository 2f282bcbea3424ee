"""Per-user privacy budgets and sensitivity-tier epsilon calibration.

Accounting is plain sequential composition: every successful release
debits its epsilon; a failed release debits nothing and the remaining
budget can never go negative.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from petward import PetwardError

EPSILON_MIN = 0.1
EPSILON_MAX = 1.0

TIER_DEFAULT_EPSILON = {"low": 1.0, "medium": 0.5, "high": 0.1}

# Data-category sensitivity tiers; higher sensitivity means less epsilon.
DEFAULT_CATEGORY_TIERS = {
    "cardiac": "medium",
    "metabolic": "high",
    "temperature": "low",
    "respiratory": "medium",
    "activity": "low",
}


class BudgetExhaustedError(PetwardError):
    pass


class PreferenceError(PetwardError):
    pass


@dataclass(frozen=True)
class SensitivityTier:
    category_tiers: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_CATEGORY_TIERS))
    tier_epsilon: dict[str, float] = field(default_factory=lambda: dict(TIER_DEFAULT_EPSILON))

    def __post_init__(self):
        for tier, eps in self.tier_epsilon.items():
            if not EPSILON_MIN <= eps <= EPSILON_MAX:
                raise PreferenceError(
                    f"tier {tier!r} default epsilon {eps} outside [{EPSILON_MIN}, {EPSILON_MAX}]"
                )
        for category, tier in self.category_tiers.items():
            if tier not in self.tier_epsilon:
                raise PreferenceError(f"category {category!r} maps to unknown tier {tier!r}")

    def default_for(self, category: str) -> float:
        tier = self.category_tiers.get(category)
        if tier is None:
            raise PreferenceError(f"no sensitivity tier for category {category!r}")
        return self.tier_epsilon[tier]


def calibrate_epsilon(tier_default: float, preference: float | None = None) -> float:
    """min(user preference, tier default), clamped into [0.1, 1.0]."""
    if preference is not None and not EPSILON_MIN <= preference <= EPSILON_MAX:
        raise PreferenceError(
            f"epsilon preference {preference} outside valid range [{EPSILON_MIN}, {EPSILON_MAX}]"
        )
    eps = tier_default if preference is None else min(preference, tier_default)
    return min(EPSILON_MAX, max(EPSILON_MIN, eps))


@dataclass
class PrivacyBudget:
    """Epsilon ledger for one user. Mutation is serialized internally."""

    user_id: str
    capacity: float
    spent: list[tuple[str, float]] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def total_spent(self) -> float:
        return sum(eps for _, eps in self.spent)

    @property
    def remaining(self) -> float:
        return self.capacity - self.total_spent

    def ensure(self, epsilon: float) -> None:
        """Raise (without debiting) if a charge of ``epsilon`` cannot succeed."""
        if self.remaining < epsilon - 1e-12:
            raise BudgetExhaustedError(
                f"user {self.user_id}: requested epsilon {epsilon} exceeds remaining {self.remaining:.6g}"
            )

    def charge(self, query_id: str, epsilon: float) -> None:
        if epsilon <= 0:
            raise PreferenceError(f"epsilon charge must be positive, got {epsilon}")
        with self._lock:
            self.ensure(epsilon)
            self.spent.append((query_id, epsilon))
