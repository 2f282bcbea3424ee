"""The trusted key service.

Per user it owns the HE keyset, the revocation tree over requester
slots, and the per-category data keys published as key envelopes. HE
secret keys never leave this service: an allowed transfer earns the
requester its current-epoch path keys plus a category grant, and the
service only proceeds with decryption after that envelope unwrap
succeeds (each success is counted and ledgered as a key release).
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from pathlib import Path

from petward import PetwardError
from petward.consent.envelope import (
    EnvelopeUnwrapError,
    KeyEnvelope,
    derive_data_key,
    unwrap,
    wrap_data_key,
)
from petward.consent.revocation import RevocationTree
from petward.he.params import HeParams
from petward.he.scheme import KeySet, keygen
from petward.he.serialize import serialize_keyset
from petward.telemetry.metrics import CATEGORIES


class KeyServiceError(PetwardError):
    pass


@dataclass
class UserKeyMaterial:
    user_id: str
    he_keys: KeySet
    tree: RevocationTree
    envelopes: dict[str, KeyEnvelope] = field(default_factory=dict)
    leaf_of: dict[str, int] = field(default_factory=dict)
    grants: dict[str, set[str]] = field(default_factory=dict)  # requester -> categories


class KeyService:
    def __init__(self, params: HeParams, seed: int, revocation_leaves: int = 16):
        self.params = params
        self.seed = seed
        self.revocation_leaves = revocation_leaves
        self._users: dict[str, UserKeyMaterial] = {}
        self.unwrap_count = 0  # instrumented: successful envelope unwraps

    def _master_secret(self, user_id: str) -> bytes:
        return hashlib.sha256(f"tree/{self.seed}/{user_id}".encode()).digest()

    def user(self, user_id: str) -> UserKeyMaterial:
        material = self._users.get(user_id)
        if material is None:
            he_seed = int.from_bytes(
                hashlib.sha256(f"he/{self.seed}/{user_id}".encode()).digest()[:8], "big"
            )
            tree = RevocationTree(
                leaf_count=self.revocation_leaves, master_secret=self._master_secret(user_id)
            )
            material = UserKeyMaterial(
                user_id=user_id, he_keys=keygen(self.params, he_seed), tree=tree
            )
            for category in CATEGORIES:
                material.envelopes[category] = wrap_data_key(
                    tree, category, derive_data_key(tree, category)
                )
            self._users[user_id] = material
        return material

    def assign_leaf(self, user_id: str, requester: str) -> int:
        material = self.user(user_id)
        if requester not in material.leaf_of:
            used = set(material.leaf_of.values())
            free = next((i for i in range(material.tree.leaf_count) if i not in used), None)
            if free is None:
                raise KeyServiceError(f"no free revocation slots for user {user_id}")
            material.leaf_of[requester] = free
        return material.leaf_of[requester]

    def grant(self, user_id: str, requester: str, categories: set[str]) -> None:
        material = self.user(user_id)
        self.assign_leaf(user_id, requester)
        material.grants.setdefault(requester, set()).update(categories)

    def unwrap_for(self, user_id: str, requester: str, category: str) -> bytes:
        """Open the current envelope with the requester's credentials.

        Counts one successful unwrap; failures (revoked, no grant) raise.
        """
        material = self.user(user_id)
        leaf = material.leaf_of.get(requester)
        grants = material.grants.get(requester, set())
        if leaf is None:
            raise EnvelopeUnwrapError()
        envelope = material.envelopes[category]
        if leaf in material.tree.revoked:
            # a revoked requester only ever received pre-revocation keyrings;
            # against the republished envelope they cannot open anything
            stale_epoch = max(0, material.tree.epoch - 1)
            holder_keys = {
                node: material.tree.node_key(node, stale_epoch)
                for node in material.tree.path_nodes(leaf)
            }
        else:
            holder_keys = {
                node: material.tree.node_key(node, envelope.epoch)
                for node in material.tree.path_nodes(leaf)
            }
        data_key = unwrap(envelope, holder_keys, grants)
        self.unwrap_count += 1
        return data_key

    def revoke(self, user_id: str, requester: str) -> int:
        """Revoke a requester's slot and republish every category envelope
        under the next epoch. Returns the new epoch."""
        material = self.user(user_id)
        leaf = material.leaf_of.get(requester)
        if leaf is None:
            raise KeyServiceError(f"{requester} holds no slot for user {user_id}")
        material.tree.revoke(leaf)
        material.grants.pop(requester, None)
        for category in CATEGORIES:
            material.envelopes[category] = wrap_data_key(
                material.tree, category, derive_data_key(material.tree, category)
            )
        return material.tree.epoch

    def data_key(self, user_id: str, category: str, epoch: int | None = None) -> bytes:
        """Service-internal data key (any epoch); external access goes
        through unwrap_for."""
        material = self.user(user_id)
        return derive_data_key(material.tree, category, epoch)

    def session_key(self, user_id: str, category: str, epoch: int | None = None) -> bytes:
        return hmac.new(
            self.data_key(user_id, category, epoch), b"frame-session", hashlib.sha256
        ).digest()

    def current_epoch(self, user_id: str) -> int:
        return self.user(user_id).tree.epoch

    def he_keyset(self, user_id: str) -> KeySet:
        return self.user(user_id).he_keys

    def persist_fixtures(self, root: Path) -> None:
        """Write key material under the access-controlled keys directory."""
        for user_id, material in self._users.items():
            user_dir = root / user_id
            user_dir.mkdir(parents=True, exist_ok=True)
            (user_dir / "keyset.bin").write_bytes(serialize_keyset(material.he_keys))
            (user_dir / "tree-secret.bin").write_bytes(material.tree.master_secret)
            for category, envelope in material.envelopes.items():
                (user_dir / f"envelope-{category}.bin").write_bytes(envelope.to_bytes())
