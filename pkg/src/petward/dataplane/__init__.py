"""Transmission and storage path: compression, authenticated framing,
Reed-Solomon erasure coding, and content-addressed placement across
simulated storage nodes."""

from petward.dataplane.compressors import (
    CODEC_DEFLATE,
    CODEC_IDENTITY,
    CodecError,
    compress,
    decompress,
)
from petward.dataplane.framing import (
    Frame,
    FrameReceiver,
    IntegrityError,
    ReplayError,
    frame,
    unframe,
)
from petward.dataplane.reed_solomon import Chunk, rs_decode, rs_encode
from petward.dataplane.storage import (
    CorruptionError,
    Manifest,
    StorageNode,
    StoragePool,
    UnrecoverableError,
    fetch,
    store,
)

__all__ = [
    "CODEC_DEFLATE",
    "CODEC_IDENTITY",
    "Chunk",
    "CodecError",
    "CorruptionError",
    "Frame",
    "FrameReceiver",
    "IntegrityError",
    "Manifest",
    "ReplayError",
    "StorageNode",
    "StoragePool",
    "UnrecoverableError",
    "compress",
    "decompress",
    "fetch",
    "frame",
    "rs_decode",
    "rs_encode",
    "store",
    "unframe",
]
