"""Scenario configuration: one JSON document drives a whole run.

Every field can be overridden from the command line with a dotted path
(for example ``stripe.k=6`` or ``duration_ms=20000``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from petward import PetwardError
from petward.consent.policy import ConsentPolicy
from petward.telemetry.metrics import Metric
from petward.telemetry.simulate import DeviceProfile, SignalModel


class ScenarioError(PetwardError):
    pass


@dataclass(frozen=True)
class UserSpec:
    user_id: str
    budget_epsilon: float = 1.0
    epsilon_preference: float | None = None
    policy: dict = field(default_factory=dict)

    def consent_policy(self) -> ConsentPolicy:
        if not self.policy:
            return ConsentPolicy(user_id=self.user_id)
        doc = dict(self.policy)
        doc.setdefault("schema_version", 1)
        doc.setdefault("user_id", self.user_id)
        return ConsentPolicy.from_dict(doc)


@dataclass(frozen=True)
class RequestScript:
    requester: str
    requester_class: str
    user_id: str
    categories: tuple[str, ...]
    context: str = "routine"
    at_ms: int = 0
    user_decision: str | None = None  # settles an ask_user request
    release: bool = False  # call release_for_analysis once allowed


@dataclass
class ScenarioConfig:
    seed: int = 0
    duration_ms: int = 10_000
    he_preset: str = "desk-wide"
    mpc_parties: int = 3
    stripe_k: int = 4
    stripe_m: int = 2
    node_count: int = 6
    nodes_down: tuple[str, ...] = ()
    nodes_corrupt: tuple[str, ...] = ()
    request_ttl_ms: int = 24 * 60 * 60 * 1000
    revocation_leaves: int = 16
    dp_tiers: dict = field(default_factory=dict)  # optional SensitivityTier override
    devices: list[DeviceProfile] = field(default_factory=list)
    users: list[UserSpec] = field(default_factory=list)
    transfer_requests: list[RequestScript] = field(default_factory=list)

    def validate(self) -> "ScenarioConfig":
        if self.duration_ms <= 0:
            raise ScenarioError("duration_ms must be positive")
        if self.stripe_k < 1 or self.stripe_m < 0:
            raise ScenarioError(f"bad stripe (k={self.stripe_k}, m={self.stripe_m})")
        if self.node_count < self.stripe_k + self.stripe_m:
            raise ScenarioError(
                f"{self.node_count} nodes cannot hold a {self.stripe_k}+{self.stripe_m} stripe"
            )
        known_users = {u.user_id for u in self.users}
        for profile in self.devices:
            profile.validate()
            if profile.owner() not in known_users:
                raise ScenarioError(
                    f"device {profile.device_id} belongs to unknown user {profile.owner()}"
                )
        for script in self.transfer_requests:
            if script.user_id not in known_users:
                raise ScenarioError(f"transfer request targets unknown user {script.user_id}")
        return self

    @staticmethod
    def from_dict(doc: dict) -> "ScenarioConfig":
        devices = []
        for spec in doc.get("devices", []):
            models = {}
            for metric_name, params in spec.get("metrics", {}).items():
                models[Metric(metric_name)] = SignalModel(
                    baseline=float(params["baseline"]),
                    amplitude=float(params.get("amplitude", 0.0)),
                    noise_std=float(params.get("noise_std", 0.0)),
                )
            devices.append(
                DeviceProfile(
                    device_id=spec["device_id"],
                    sampling_period_ms=int(spec.get("sampling_period_ms", 1000)),
                    signal_models=models,
                    seed=int(spec.get("seed", doc.get("seed", 0))),
                    user_id=spec.get("user_id", ""),
                )
            )
        users = [
            UserSpec(
                user_id=u["user_id"],
                budget_epsilon=float(u.get("budget_epsilon", 1.0)),
                epsilon_preference=u.get("epsilon_preference"),
                policy=u.get("policy", {}),
            )
            for u in doc.get("users", [])
        ]
        requests = [
            RequestScript(
                requester=r["requester"],
                requester_class=r["requester_class"],
                user_id=r["user_id"],
                categories=tuple(r["categories"]),
                context=r.get("context", "routine"),
                at_ms=int(r.get("at_ms", 0)),
                user_decision=r.get("user_decision"),
                release=bool(r.get("release", False)),
            )
            for r in doc.get("transfer_requests", [])
        ]
        stripe = doc.get("stripe", {})
        return ScenarioConfig(
            seed=int(doc.get("seed", 0)),
            duration_ms=int(doc.get("duration_ms", 10_000)),
            he_preset=doc.get("he_preset", "desk-wide"),
            mpc_parties=int(doc.get("mpc_parties", 3)),
            stripe_k=int(stripe.get("k", 4)),
            stripe_m=int(stripe.get("m", 2)),
            node_count=int(doc.get("nodes", 6)),
            nodes_down=tuple(doc.get("fault_plan", {}).get("down", ())),
            nodes_corrupt=tuple(doc.get("fault_plan", {}).get("corrupt", ())),
            request_ttl_ms=int(doc.get("request_ttl_ms", 24 * 60 * 60 * 1000)),
            revocation_leaves=int(doc.get("revocation_leaves", 16)),
            dp_tiers=doc.get("dp_tiers", {}),
            devices=devices,
            users=users,
            transfer_requests=requests,
        ).validate()

    @staticmethod
    def from_file(path: str | Path) -> "ScenarioConfig":
        return ScenarioConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def pair_override_tokens(tokens: list[str]) -> list[str]:
    """Normalize CLI override spellings: both ``a.b=v`` and ``--a.b v``."""
    out: list[str] = []
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token.startswith("--") and "=" not in token and i + 1 < len(tokens):
            out.append(f"{token[2:]}={tokens[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply ``a.b.c=value`` tokens onto a raw config document."""
    for token in pair_override_tokens(overrides):
        if "=" not in token:
            raise ScenarioError(f"override {token!r} is not of the form path=value")
        path, raw_value = token.split("=", 1)
        path = path.lstrip("-")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        node = doc
        keys = path.split(".")
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ScenarioError(f"override path {path!r} crosses a non-object value")
        node[keys[-1]] = value
    return doc
