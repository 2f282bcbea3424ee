"""Differential privacy for released aggregates: Laplace mechanism,
query sensitivity, per-user budget accounting, and an empirical
epsilon harness."""

from petward.dp.queries import Query, QueryKind, UnsupportedQueryError, sensitivity
from petward.dp.budget import (
    BudgetExhaustedError,
    PreferenceError,
    PrivacyBudget,
    SensitivityTier,
    calibrate_epsilon,
)
from petward.dp.mechanism import (
    DpParameterError,
    NoisyRelease,
    laplace_sample,
    privatize,
    privatize_value,
)
from petward.dp.harness import empirical_epsilon_check

__all__ = [
    "BudgetExhaustedError",
    "DpParameterError",
    "NoisyRelease",
    "PreferenceError",
    "PrivacyBudget",
    "Query",
    "QueryKind",
    "SensitivityTier",
    "UnsupportedQueryError",
    "calibrate_epsilon",
    "empirical_epsilon_check",
    "laplace_sample",
    "privatize",
    "privatize_value",
    "sensitivity",
]
