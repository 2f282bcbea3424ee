"""Complete-subtree revocation over a binary tree of holder slots.

Nodes are heap-indexed (root 1, children 2i and 2i+1, leaves N..2N-1).
Every node has a symmetric key derived per epoch from the tree's master
secret; a holder at leaf i carries the d+1 keys on its root-to-leaf path
for the epochs it was issued. Revoking never re-encrypts stored data:
the next envelope simply wraps under the cover of the surviving leaves.
"""

from __future__ import annotations

import hashlib
import hmac
import math
from dataclasses import dataclass, field

from petward import PetwardError

NODE_KEY_LEN = 32


class RevocationError(PetwardError):
    pass


@dataclass
class RevocationTree:
    leaf_count: int
    master_secret: bytes
    revoked: set[int] = field(default_factory=set)  # leaf indices, 0-based
    epoch: int = 0

    def __post_init__(self):
        n = self.leaf_count
        if n < 2 or n & (n - 1):
            raise RevocationError(f"leaf count must be a power of two >= 2, got {n}")
        if len(self.master_secret) < 16:
            raise RevocationError("master secret must be at least 16 bytes")

    @property
    def depth(self) -> int:
        return int(math.log2(self.leaf_count))

    def leaf_node(self, leaf_index: int) -> int:
        if not 0 <= leaf_index < self.leaf_count:
            raise RevocationError(f"leaf index {leaf_index} outside 0..{self.leaf_count - 1}")
        return self.leaf_count + leaf_index

    def path_nodes(self, leaf_index: int) -> list[int]:
        """Root-to-leaf node ids; always depth+1 entries."""
        node = self.leaf_node(leaf_index)
        path = []
        while node >= 1:
            path.append(node)
            node //= 2
        return list(reversed(path))

    def node_key(self, node_id: int, epoch: int | None = None) -> bytes:
        epoch = self.epoch if epoch is None else epoch
        msg = b"node-key" + node_id.to_bytes(8, "big") + epoch.to_bytes(8, "big")
        return hmac.new(self.master_secret, msg, hashlib.sha256).digest()[:NODE_KEY_LEN]

    def issue_path_keys(self, leaf_index: int, epoch: int | None = None) -> dict[int, bytes]:
        """Keyring issued to a holder for the given epoch.

        Issuance is gated: a revoked leaf cannot obtain keys for the
        current epoch (it keeps whatever it was issued earlier).
        """
        epoch = self.epoch if epoch is None else epoch
        if epoch == self.epoch and leaf_index in self.revoked:
            raise RevocationError(f"leaf {leaf_index} is revoked; no keys for epoch {epoch}")
        return {node: self.node_key(node, epoch) for node in self.path_nodes(leaf_index)}

    def revoke(self, leaf_index: int) -> None:
        self.leaf_node(leaf_index)  # bounds check
        if leaf_index not in self.revoked:
            self.revoked.add(leaf_index)
            self.epoch += 1  # every revocation change starts a new epoch

    def reinstate(self, leaf_index: int) -> None:
        if leaf_index in self.revoked:
            self.revoked.remove(leaf_index)
            self.epoch += 1


def _subtree_leaves(tree: RevocationTree, node: int) -> range:
    """Leaf indices under ``node`` (in 0-based leaf numbering)."""
    lo, hi = node, node
    while lo < tree.leaf_count:
        lo *= 2
        hi = hi * 2 + 1
    return range(lo - tree.leaf_count, hi - tree.leaf_count + 1)


def compute_cover(tree: RevocationTree) -> set[int]:
    """Node ids of the maximal subtrees containing no revoked leaf.

    Empty revocation set covers with just the root; a fully revoked tree
    has an empty cover.
    """
    cover: set[int] = set()

    def walk(node: int) -> None:
        leaves = _subtree_leaves(tree, node)
        if not any(leaf in tree.revoked for leaf in leaves):
            cover.add(node)
            return
        if node >= tree.leaf_count:
            return  # revoked leaf
        walk(2 * node)
        walk(2 * node + 1)

    walk(1)
    return cover
