"""Hash-chained, append-only audit ledger. Blocks record only
transfer-request lifecycle and decryption events; a run with no transfer
requests writes no blocks at all."""

from petward.ledger.events import AuditEvent, EventKind, EventValidationError
from petward.ledger.chain import AuditBlock, AuditLedger, LedgerQuery
from petward.ledger.logfile import LedgerFileError, open_ledger, read_blocks

__all__ = [
    "AuditBlock",
    "AuditEvent",
    "AuditLedger",
    "EventKind",
    "EventValidationError",
    "LedgerFileError",
    "LedgerQuery",
    "open_ledger",
    "read_blocks",
]
