"""Sharing policies and their evaluation.

A policy holds one static rule per (category, recipient class) plus an
ordered list of context rules. Evaluation is deterministic: the first
context rule to match (by priority) wins, otherwise the static rule,
otherwise deny. A request naming several categories gets the most
restrictive of the per-category outcomes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from petward import PetwardError
from petward.telemetry.metrics import CATEGORIES

RECIPIENT_CLASSES = ("clinician", "researcher", "insurer", "self")
CONTEXT_TAGS = ("routine", "research", "emergency")
EFFECTS = ("allow", "deny", "ask_user")

# most restrictive first; combining categories takes the minimum index... highest wins
_RESTRICTIVENESS = {"deny": 2, "ask_user": 1, "allow": 0}


class PolicyError(PetwardError):
    pass


class VersionConflictError(PolicyError):
    pass


@dataclass(frozen=True)
class ContextRule:
    priority: int
    effect: str
    recipient_class: str | None = None
    category: str | None = None
    context: str | None = None

    def __post_init__(self):
        if self.effect not in EFFECTS:
            raise PolicyError(f"unknown effect {self.effect!r}")
        if self.recipient_class is not None and self.recipient_class not in RECIPIENT_CLASSES:
            raise PolicyError(f"unknown recipient class {self.recipient_class!r}")
        if self.context is not None and self.context not in CONTEXT_TAGS:
            raise PolicyError(f"unknown context tag {self.context!r}")

    def matches(self, recipient_class: str, category: str, context: str) -> bool:
        if self.recipient_class is not None and self.recipient_class != recipient_class:
            return False
        if self.category is not None and self.category != category:
            return False
        if self.context is not None and self.context != context:
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "priority": self.priority,
            "effect": self.effect,
            "recipient_class": self.recipient_class,
            "category": self.category,
            "context": self.context,
        }

    @staticmethod
    def from_dict(d: dict) -> "ContextRule":
        return ContextRule(
            priority=int(d["priority"]),
            effect=d["effect"],
            recipient_class=d.get("recipient_class"),
            category=d.get("category"),
            context=d.get("context"),
        )


@dataclass(frozen=True)
class ConsentPolicy:
    user_id: str
    version: int = 1
    static_rules: dict[tuple[str, str], str] = field(default_factory=dict)
    context_rules: tuple[ContextRule, ...] = ()

    def __post_init__(self):
        for (category, recipient_class), effect in self.static_rules.items():
            if recipient_class not in RECIPIENT_CLASSES:
                raise PolicyError(f"unknown recipient class {recipient_class!r}")
            if effect not in EFFECTS:
                raise PolicyError(f"unknown effect {effect!r}")
        priorities = [r.priority for r in self.context_rules]
        if len(priorities) != len(set(priorities)):
            raise PolicyError("context rule priorities must be unique within a policy")

    def ordered_context_rules(self) -> list[ContextRule]:
        return sorted(self.context_rules, key=lambda r: r.priority)

    def to_dict(self) -> dict:
        grid: dict[str, dict[str, str]] = {}
        for (category, recipient_class), effect in sorted(self.static_rules.items()):
            grid.setdefault(category, {})[recipient_class] = effect
        return {
            "schema_version": 1,
            "user_id": self.user_id,
            "version": self.version,
            "rules": grid,
            "context_rules": [r.to_dict() for r in self.ordered_context_rules()],
        }

    @staticmethod
    def from_dict(d: dict) -> "ConsentPolicy":
        if d.get("schema_version") != 1:
            raise PolicyError(f"unsupported policy schema version {d.get('schema_version')!r}")
        static: dict[tuple[str, str], str] = {}
        for category, row in d.get("rules", {}).items():
            for recipient_class, effect in row.items():
                static[(category, recipient_class)] = effect
        return ConsentPolicy(
            user_id=d["user_id"],
            version=int(d.get("version", 1)),
            static_rules=static,
            context_rules=tuple(ContextRule.from_dict(r) for r in d.get("context_rules", [])),
        )


def _evaluate_category(
    policy: ConsentPolicy, recipient_class: str, category: str, context: str
) -> tuple[str, str]:
    if category not in CATEGORIES:
        return "deny", f"unknown category {category!r} is never shared"
    for rule in policy.ordered_context_rules():
        if rule.matches(recipient_class, category, context):
            return rule.effect, f"context rule #{rule.priority} ({rule.effect})"
    static = policy.static_rules.get((category, recipient_class))
    if static is not None:
        return static, f"static rule {category}/{recipient_class} ({static})"
    return "deny", f"no rule for {category}/{recipient_class}; default deny"


def evaluate_detailed(request, policy: ConsentPolicy) -> tuple[str, str]:
    """Decision plus the diagnostic of the rule that produced it. Several
    requested categories combine to the most restrictive outcome."""
    if not request.categories:
        return "deny", "no categories requested; default deny"
    outcomes = [
        (_evaluate_category(policy, request.requester_class, category, request.context), category)
        for category in sorted(request.categories)
    ]
    (decision, reason), category = max(outcomes, key=lambda o: _RESTRICTIVENESS[o[0][0]])
    return decision, f"{category}: {reason}"


def evaluate(request, policy: ConsentPolicy) -> str:
    """Decision for a pending transfer request: allow, deny, or ask_user."""
    return evaluate_detailed(request, policy)[0]


# Example context-rule sets for the emergency question: whether an emergency
# should share more (clinicians get through) or less (everything locked down)
# is the user's call, so both ship as fixtures.
EMERGENCY_WIDENS_RULES = (
    ContextRule(priority=1, effect="allow", recipient_class="clinician", context="emergency"),
)
EMERGENCY_NARROWS_RULES = (
    ContextRule(priority=1, effect="deny", context="emergency"),
)


class PolicyStore:
    """Versioned per-user policies: concurrent readers, serialized writers.

    ``put`` enforces compare-and-set on the version so a stale editor can
    never silently overwrite a newer policy.
    """

    def __init__(self):
        self._policies: dict[str, ConsentPolicy] = {}
        self._lock = threading.Lock()

    def get(self, user_id: str) -> ConsentPolicy:
        with self._lock:
            return self._policies.get(user_id) or ConsentPolicy(user_id=user_id, version=0)

    def put(self, policy: ConsentPolicy, expected_version: int | None = None) -> ConsentPolicy:
        with self._lock:
            current = self._policies.get(policy.user_id)
            current_version = current.version if current else 0
            if expected_version is not None and expected_version != current_version:
                raise VersionConflictError(
                    f"policy for {policy.user_id} is at version {current_version}, "
                    f"editor expected {expected_version}"
                )
            stored = replace(policy, version=current_version + 1)
            self._policies[policy.user_id] = stored
            return stored
