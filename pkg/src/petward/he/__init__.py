"""Leveled homomorphic encryption over a power-of-two cyclotomic ring
with slot packing: additions and a bounded number of multiplications on
encrypted telemetry."""

from petward.he.params import HeParameterError, HeParams
from petward.he.presets import NOT_SECURE_NOTE, PRESET_NAMES, get_preset
from petward.he.scheme import (
    Ciphertext,
    DepthExhaustedError,
    HeRangeError,
    KeySet,
    LevelMismatchError,
    Plaintext,
    decode,
    decrypt,
    encode,
    encrypt,
    he_add,
    he_mul,
    keygen,
    mod_switch,
    noise_budget,
)
from petward.he.serialize import (
    SerializationError,
    deserialize_ciphertext,
    deserialize_keyset,
    serialize_ciphertext,
    serialize_keyset,
)

__all__ = [
    "Ciphertext",
    "DepthExhaustedError",
    "HeParameterError",
    "HeParams",
    "HeRangeError",
    "KeySet",
    "LevelMismatchError",
    "NOT_SECURE_NOTE",
    "PRESET_NAMES",
    "Plaintext",
    "SerializationError",
    "decode",
    "decrypt",
    "deserialize_ciphertext",
    "deserialize_keyset",
    "encode",
    "encrypt",
    "get_preset",
    "he_add",
    "he_mul",
    "keygen",
    "mod_switch",
    "noise_budget",
    "serialize_ciphertext",
    "serialize_keyset",
]
