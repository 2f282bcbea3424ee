"""petward: a privacy-preserving pipeline for simulated wearable health telemetry.

Vitals flow from simulated devices through preprocessing, leveled homomorphic
encryption, authenticated framing, and erasure-coded storage; releases are
gated by user consent, selective key envelopes, and a differential-privacy
budget, with every transfer recorded on a hash-chained audit ledger.
"""

__version__ = "0.1.0"


class PetwardError(Exception):
    """Base class for all errors raised by this package."""
