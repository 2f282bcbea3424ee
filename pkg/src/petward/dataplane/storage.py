"""Content-addressed chunk placement across simulated storage nodes.

Nodes are in-process objects with injectable fault behaviors (down,
corrupt, slow). Chunks are named by the hex digest of their bytes;
fetch verifies every chunk against its content id and falls back to
parity when a node lies or is gone.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from petward import PetwardError
from petward.dataplane.reed_solomon import Chunk, UnrecoverableError, rs_decode, rs_encode


class StorageError(PetwardError):
    pass


class NodeDownError(StorageError):
    pass


class CorruptionError(StorageError):
    """A node returned bytes that do not hash to the requested content id."""

    def __init__(self, node_id: str, content_id: str):
        self.node_id = node_id
        super().__init__(f"node {node_id} returned corrupt bytes for {content_id}")


@dataclass(frozen=True)
class Manifest:
    object_id: str
    k: int
    m: int
    chunk_ids: list[str]  # hex content ids, stripe order
    placement: list[str]  # node id per stripe position (chunks can repeat bytes)
    original_length: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "object_id": self.object_id,
                "k": self.k,
                "m": self.m,
                "chunk_ids": self.chunk_ids,
                "placement": list(self.placement),
                "original_length": self.original_length,
            },
            indent=2,
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Manifest":
        d = json.loads(text)
        return Manifest(
            object_id=d["object_id"],
            k=d["k"],
            m=d["m"],
            chunk_ids=list(d["chunk_ids"]),
            placement=list(d["placement"]),
            original_length=d["original_length"],
        )


class StorageNode:
    """One simulated storage node. Fault knobs:

    - down: refuses reads and writes
    - corrupt: serves flipped bytes (detected by content addressing)
    - latency_s: sleep before serving a read
    """

    def __init__(self, node_id: str, root: Path | None = None):
        self.node_id = node_id
        self.down = False
        self.corrupt = False
        self.latency_s = 0.0
        self._root = root
        self._mem: dict[str, bytes] = {}
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)

    def put(self, content_id: str, data: bytes) -> None:
        if self.down:
            raise NodeDownError(f"node {self.node_id} is down")
        if self._root is not None:
            (self._root / content_id).write_bytes(data)
        else:
            self._mem[content_id] = data

    def get(self, content_id: str) -> bytes:
        if self.down:
            raise NodeDownError(f"node {self.node_id} is down")
        if self.latency_s:
            time.sleep(self.latency_s)
        if self._root is not None:
            path = self._root / content_id
            if not path.exists():
                raise StorageError(f"node {self.node_id} has no chunk {content_id}")
            data = path.read_bytes()
        else:
            if content_id not in self._mem:
                raise StorageError(f"node {self.node_id} has no chunk {content_id}")
            data = self._mem[content_id]
        if self.corrupt:
            data = bytes([data[0] ^ 0xFF]) + data[1:] if data else data
        return data


@dataclass
class StoragePool:
    nodes: list[StorageNode]
    _counter: int = field(default=0, repr=False)

    def node(self, node_id: str) -> StorageNode:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise StorageError(f"unknown node {node_id}")

    def live_nodes(self) -> list[StorageNode]:
        return [n for n in self.nodes if not n.down]

    def next_object_id(self, data: bytes) -> str:
        self._counter += 1
        return hashlib.sha256(data + self._counter.to_bytes(8, "big")).hexdigest()[:32]


def store(data: bytes, k: int, m: int, pool: StoragePool) -> Manifest:
    """Erasure-code ``data`` and place one chunk per node, round-robin."""
    if len(pool.nodes) < k + m:
        raise StorageError(f"need at least {k + m} nodes for distinct placement, have {len(pool.nodes)}")
    chunks = rs_encode(data, k, m)
    object_id = pool.next_object_id(data)
    placement: list[str] = []
    chunk_ids: list[str] = []
    for i, chunk in enumerate(chunks):
        node = pool.nodes[i % len(pool.nodes)]
        hex_id = chunk.content_id.hex()
        node.put(hex_id, chunk.data)
        placement.append(node.node_id)
        chunk_ids.append(hex_id)
    return Manifest(object_id, k, m, chunk_ids, placement, len(data))


def _read_one(pool: StoragePool, manifest: Manifest, index: int) -> Chunk:
    hex_id = manifest.chunk_ids[index]
    node = pool.node(manifest.placement[index])
    data = node.get(hex_id)
    chunk = Chunk(bytes.fromhex(hex_id), index, data)
    if not chunk.verify():
        raise CorruptionError(node.node_id, hex_id)
    return chunk


def fetch(
    manifest: Manifest,
    pool: StoragePool,
    corruption_log: list[CorruptionError] | None = None,
) -> bytes:
    """Fetch and verify the stripe concurrently, then reconstruct.

    Corrupt chunks are detected by content id, reported into
    ``corruption_log`` (naming the node), and excluded; reconstruction
    proceeds from the remaining parity as long as k honest chunks
    survive. With fewer than k honest chunks the first corruption (if
    any) is raised, otherwise an UnrecoverableError.
    """
    total = manifest.k + manifest.m
    good: list[Chunk] = []
    corruptions: list[CorruptionError] = []
    with ThreadPoolExecutor(max_workers=min(8, total)) as executor:
        for outcome in executor.map(lambda i: _try_read(pool, manifest, i), range(total)):
            if isinstance(outcome, Chunk):
                good.append(outcome)
            elif isinstance(outcome, CorruptionError):
                corruptions.append(outcome)
    if corruption_log is not None:
        corruption_log.extend(corruptions)
    if len(good) < manifest.k:
        if corruptions:
            raise corruptions[0]
        missing = sorted(set(range(total)) - {c.index for c in good})
        raise UnrecoverableError(missing, needed=manifest.k, have=len(good))
    return rs_decode(good, manifest.k, manifest.m, manifest.original_length)


def _try_read(pool: StoragePool, manifest: Manifest, index: int):
    try:
        return _read_one(pool, manifest, index)
    except CorruptionError as exc:
        return exc
    except StorageError:
        return None
