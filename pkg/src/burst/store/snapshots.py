"""State snapshots: pure caches over the event log.

File ``<dir>/snapshots/<seq>.snap``::

    version: u8 | as_of: u64 LE | blob_len: u64 LE | sha256(blob): 32 bytes | blob

The blob is the canonical JSON state serialization. A snapshot that fails
its checksum is ignored (the log remains the source of truth), so any
snapshot file may be deleted at will.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path
from typing import Optional, Tuple

SNAP_VERSION = 1
SNAP_HEADER = struct.Struct("<BQQ")


class SnapshotStore:
    def __init__(self, root: Path):
        self.dir = Path(root) / "snapshots"
        self.dir.mkdir(parents=True, exist_ok=True)

    def save(self, state: dict, as_of: int) -> Path:
        blob = json.dumps(state, sort_keys=True, separators=(",", ":")).encode()
        path = self.dir / f"{as_of}.snap"
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write(SNAP_HEADER.pack(SNAP_VERSION, as_of, len(blob)))
            fh.write(hashlib.sha256(blob).digest())
            fh.write(blob)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return path

    def _load(self, path: Path) -> Optional[Tuple[dict, int]]:
        data = path.read_bytes()
        if len(data) < SNAP_HEADER.size + 32:
            return None
        version, as_of, blob_len = SNAP_HEADER.unpack_from(data, 0)
        if version != SNAP_VERSION:
            return None
        digest = data[SNAP_HEADER.size : SNAP_HEADER.size + 32]
        blob = data[SNAP_HEADER.size + 32 : SNAP_HEADER.size + 32 + blob_len]
        if len(blob) != blob_len or hashlib.sha256(blob).digest() != digest:
            return None
        return json.loads(blob.decode()), as_of

    def load_latest(self) -> Optional[Tuple[dict, int]]:
        """Newest valid snapshot, or None. Corrupt files are skipped."""
        candidates = sorted(
            (int(p.stem), p) for p in self.dir.glob("*.snap") if p.stem.isdigit()
        )
        for _, path in reversed(candidates):
            loaded = self._load(path)
            if loaded is not None:
                return loaded
        return None
