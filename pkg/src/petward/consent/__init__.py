"""User-centric consent: sharing policies with context rules, the
pending-approval flow for transfer requests, complete-subtree revocation,
and category-gated key envelopes."""

from petward.consent.policy import (
    CONTEXT_TAGS,
    EFFECTS,
    RECIPIENT_CLASSES,
    ConsentPolicy,
    ContextRule,
    PolicyError,
    PolicyStore,
    VersionConflictError,
    evaluate,
)
from petward.consent.requests import (
    AuthorizationError,
    DecisionConflictError,
    RequestStore,
    TransferRequest,
    UnknownRequestError,
)
from petward.consent.revocation import RevocationError, RevocationTree, compute_cover
from petward.consent.envelope import (
    EnvelopeUnwrapError,
    KeyEnvelope,
    rotate_epoch_and_wrap,
    unwrap,
)

__all__ = [
    "AuthorizationError",
    "CONTEXT_TAGS",
    "ConsentPolicy",
    "ContextRule",
    "DecisionConflictError",
    "EFFECTS",
    "EnvelopeUnwrapError",
    "KeyEnvelope",
    "PolicyError",
    "PolicyStore",
    "RECIPIENT_CLASSES",
    "RequestStore",
    "RevocationError",
    "RevocationTree",
    "TransferRequest",
    "UnknownRequestError",
    "VersionConflictError",
    "compute_cover",
    "evaluate",
    "rotate_epoch_and_wrap",
    "unwrap",
]
