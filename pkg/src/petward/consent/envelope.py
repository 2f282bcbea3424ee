"""Category-gated key envelopes over the revocation tree.

A data key is wrapped (AES-GCM) once per cover node of the current
epoch; opening requires both a matching cover-node key and a grant for
the envelope's category. Wrong key and missing grant fail with the same
error class, so an attacker cannot tell which check stopped them.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from petward import PetwardError
from petward.consent.revocation import RevocationTree, compute_cover

ENVELOPE_MAGIC = b"PWEN"
ENVELOPE_VERSION = 1
NONCE_LEN = 12
KEY_CHECK_LEN = 16
DATA_KEY_LEN = 32


class EnvelopeUnwrapError(PetwardError):
    def __init__(self):
        super().__init__("envelope unwrap failed")


@dataclass(frozen=True)
class Wrap:
    node_id: int
    nonce: bytes
    ciphertext: bytes  # AES-GCM output: wrapped key || 16-byte tag


@dataclass(frozen=True)
class KeyEnvelope:
    category: str
    epoch: int
    wraps: tuple[Wrap, ...]
    key_check: bytes  # binds the envelope to its data key

    def to_bytes(self) -> bytes:
        out = [ENVELOPE_MAGIC, bytes([ENVELOPE_VERSION]), struct.pack(">Q", self.epoch)]
        cat = self.category.encode("utf-8")
        out.append(struct.pack(">H", len(cat)))
        out.append(cat)
        out.append(struct.pack(">H", len(self.wraps)))
        for wrap in self.wraps:
            out.append(struct.pack(">I", wrap.node_id))
            out.append(wrap.nonce)
            out.append(struct.pack(">I", len(wrap.ciphertext)))
            out.append(wrap.ciphertext)
        out.append(self.key_check)
        return b"".join(out)

    @staticmethod
    def from_bytes(raw: bytes) -> "KeyEnvelope":
        if raw[:4] != ENVELOPE_MAGIC or raw[4] != ENVELOPE_VERSION:
            raise PetwardError("not a key envelope")
        offset = 5
        (epoch,) = struct.unpack_from(">Q", raw, offset)
        offset += 8
        (cat_len,) = struct.unpack_from(">H", raw, offset)
        offset += 2
        category = raw[offset : offset + cat_len].decode("utf-8")
        offset += cat_len
        (count,) = struct.unpack_from(">H", raw, offset)
        offset += 2
        wraps = []
        for _ in range(count):
            (node_id,) = struct.unpack_from(">I", raw, offset)
            offset += 4
            nonce = raw[offset : offset + NONCE_LEN]
            offset += NONCE_LEN
            (ct_len,) = struct.unpack_from(">I", raw, offset)
            offset += 4
            ct = raw[offset : offset + ct_len]
            offset += ct_len
            wraps.append(Wrap(node_id, nonce, ct))
        key_check = raw[offset : offset + KEY_CHECK_LEN]
        return KeyEnvelope(category, epoch, tuple(wraps), key_check)


def _key_check(data_key: bytes) -> bytes:
    return hmac.new(data_key, b"petward-key-check", hashlib.sha256).digest()[:KEY_CHECK_LEN]


def _aad(category: str, epoch: int, node_id: int) -> bytes:
    return b"wrap" + category.encode("utf-8") + struct.pack(">QI", epoch, node_id)


def derive_data_key(tree: RevocationTree, category: str, epoch: int | None = None) -> bytes:
    """Deterministic per-(category, epoch) data key off the tree secret."""
    epoch = tree.epoch if epoch is None else epoch
    msg = b"data-key" + category.encode("utf-8") + epoch.to_bytes(8, "big")
    return hmac.new(tree.master_secret, msg, hashlib.sha256).digest()[:DATA_KEY_LEN]


def wrap_data_key(tree: RevocationTree, category: str, data_key: bytes) -> KeyEnvelope:
    """Wrap ``data_key`` under every cover-node key of the current epoch.

    With everything revoked the cover is empty and the envelope carries
    zero wraps: structurally valid, never openable.
    """
    cover = compute_cover(tree)
    wraps = []
    for node_id in sorted(cover):
        key = tree.node_key(node_id)
        nonce = hashlib.sha256(
            tree.master_secret + _aad(category, tree.epoch, node_id)
        ).digest()[:NONCE_LEN]
        ct = AESGCM(key).encrypt(nonce, data_key, _aad(category, tree.epoch, node_id))
        wraps.append(Wrap(node_id, nonce, ct))
    return KeyEnvelope(category, tree.epoch, tuple(wraps), _key_check(data_key))


def rotate_epoch_and_wrap(tree: RevocationTree, category: str) -> tuple[KeyEnvelope, bytes]:
    """Advance the epoch, derive a fresh data key, and publish its envelope."""
    tree.epoch += 1
    data_key = derive_data_key(tree, category)
    return wrap_data_key(tree, category, data_key), data_key


def unwrap(envelope: KeyEnvelope, holder_keys: dict[int, bytes], grants: set[str]) -> bytes:
    """Recover the data key, or fail.

    Succeeds iff some held key opens a cover wrap AND the grant set
    covers the envelope's category; the key-check tag is verified before
    the key is returned. All failure modes raise the same error.
    """
    if envelope.category in grants:
        for wrap in envelope.wraps:
            key = holder_keys.get(wrap.node_id)
            if key is None:
                continue
            try:
                data_key = AESGCM(key).decrypt(
                    wrap.nonce, wrap.ciphertext, _aad(envelope.category, envelope.epoch, wrap.node_id)
                )
            except InvalidTag:
                continue
            if hmac.compare_digest(_key_check(data_key), envelope.key_check):
                return data_key
    raise EnvelopeUnwrapError()
