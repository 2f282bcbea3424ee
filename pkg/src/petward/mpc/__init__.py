"""SPDZ-style authenticated secret sharing with a trusted-dealer offline
phase: additive shares carry information-theoretic MACs under a shared
key, multiplications consume Beaver triples, and openings are verified
by a commit-then-reveal MAC check."""

from petward.mpc.context import (
    AuthShare,
    BeaverTriple,
    MacCheckError,
    MpcContext,
    MpcParameterError,
    MpcRangeError,
    OfflineExhaustedError,
    ProtocolError,
    TriplePool,
    TripleReuseError,
    add_shares,
    dealer_setup,
    decode_fixed,
    encode_fixed,
    make_triple,
    share_input,
)
from petward.mpc.protocol import MpcSession
from petward.mpc.aggregate import secure_aggregate

__all__ = [
    "AuthShare",
    "BeaverTriple",
    "MacCheckError",
    "MpcContext",
    "MpcParameterError",
    "MpcRangeError",
    "MpcSession",
    "OfflineExhaustedError",
    "ProtocolError",
    "TriplePool",
    "TripleReuseError",
    "add_shares",
    "dealer_setup",
    "decode_fixed",
    "encode_fixed",
    "make_triple",
    "secure_aggregate",
    "share_input",
]
