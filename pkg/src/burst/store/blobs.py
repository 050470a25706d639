"""Content-addressed attachment storage: ``blobs/<hh>/<sha256-hex>``."""
from __future__ import annotations

import hashlib
import os
from pathlib import Path

MAX_BLOB_BYTES = 5 * 1024 * 1024


class BlobTooLarge(Exception):
    pass


class UnknownBlob(Exception):
    pass


class BlobStore:
    def __init__(self, root: Path):
        self.dir = Path(root) / "blobs"
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.dir / digest[:2] / digest

    def put(self, data: bytes) -> str:
        if len(data) > MAX_BLOB_BYTES:
            raise BlobTooLarge(f"blob of {len(data)} bytes exceeds {MAX_BLOB_BYTES}")
        digest = hashlib.sha256(data).hexdigest()
        path = self._path(digest)
        if path.exists():
            return digest
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return digest

    def get(self, digest: str) -> bytes:
        path = self._path(digest)
        if not path.exists():
            raise UnknownBlob(digest)
        return path.read_bytes()

    def has(self, digest: str) -> bool:
        return self._path(digest).exists()
