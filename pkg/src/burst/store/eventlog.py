"""Durable append-only event log.

Layout: ``<dir>/log/seg-<first_seq>.bin``. Each segment starts with a one
byte schema version; records follow as::

    seq: u64 LE | crc32(payload): u32 LE | length: u32 LE | payload

Payload is the canonical JSON serialization of the event. Appends are
fsynced before returning. On open, a torn final record (short or failing
its checksum) is truncated; corruption anywhere else is an error.
"""
from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path
from typing import Iterator, Optional

from ..core.types import Event

SCHEMA_VERSION = 1
HEADER = struct.Struct("<QII")
SEGMENT_LIMIT = 64 * 1024 * 1024


class LogCorruption(Exception):
    pass


def encode_event(event: Event) -> bytes:
    return json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":")).encode()


def decode_event(payload: bytes) -> Event:
    return Event.from_dict(json.loads(payload.decode()))


class EventLog:
    def __init__(self, root: Path):
        self.dir = Path(root) / "log"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._fh = None
        self._active: Optional[Path] = None
        self.next_seq = 1
        self._recover()

    # -- recovery -------------------------------------------------------

    def _segments(self) -> list:
        segs = []
        for path in self.dir.glob("seg-*.bin"):
            segs.append((int(path.stem.split("-", 1)[1]), path))
        return sorted(segs)

    def _recover(self) -> None:
        last_seq = 0
        segs = self._segments()
        for i, (first_seq, path) in enumerate(segs):
            is_last = i == len(segs) - 1
            last_seq = self._scan_segment(path, first_seq, last_seq, truncate_torn=is_last)
        self.next_seq = last_seq + 1
        if segs:
            self._active = segs[-1][1]

    def _scan_segment(self, path: Path, first_seq: int, prev_seq: int, truncate_torn: bool) -> int:
        data = path.read_bytes()
        if not data or data[0] != SCHEMA_VERSION:
            raise LogCorruption(f"{path}: bad or missing schema version byte")
        offset = 1
        seq = prev_seq
        while offset < len(data):
            if offset + HEADER.size > len(data):
                break  # torn header, necessarily at EOF
            rec_seq, crc, length = HEADER.unpack_from(data, offset)
            body = data[offset + HEADER.size : offset + HEADER.size + length]
            if len(body) < length or zlib.crc32(body) != crc:
                # only a record that runs to EOF can be a torn write; a bad
                # record with data after it means real corruption
                if offset + HEADER.size + length < len(data):
                    raise LogCorruption(f"{path}: corrupt record at byte {offset}")
                break
            if rec_seq != seq + 1:
                raise LogCorruption(f"{path}: seq {rec_seq} after {seq}")
            seq = rec_seq
            offset += HEADER.size + length
        if offset < len(data):
            if not truncate_torn:
                raise LogCorruption(f"{path}: torn record in non-final segment at byte {offset}")
            with open(path, "r+b") as fh:
                fh.truncate(offset)
                fh.flush()
                os.fsync(fh.fileno())
        return seq

    # -- writing --------------------------------------------------------

    def _open_segment(self, first_seq: int) -> None:
        self._close_fh()
        self._active = self.dir / f"seg-{first_seq}.bin"
        self._fh = open(self._active, "ab")
        if self._fh.tell() == 0:
            self._fh.write(bytes([SCHEMA_VERSION]))
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def _ensure_writable(self) -> None:
        if self._fh is None:
            if self._active is None:
                self._open_segment(self.next_seq)
            else:
                self._fh = open(self._active, "ab")
        if self._fh.tell() >= SEGMENT_LIMIT:
            self._open_segment(self.next_seq)

    def append(self, event: Event, sync: bool = True) -> int:
        """Write one event durably; returns its sequence number."""
        if event.seq == 0:
            event.seq = self.next_seq
        elif event.seq != self.next_seq:
            raise ValueError(f"event seq {event.seq}, log expects {self.next_seq}")
        self._ensure_writable()
        payload = encode_event(event)
        self._fh.write(HEADER.pack(event.seq, zlib.crc32(payload), len(payload)))
        self._fh.write(payload)
        if sync:
            self.sync()
        self.next_seq += 1
        return event.seq

    def append_batch(self, events) -> None:
        """Append several events with a single fsync at the end."""
        for event in events:
            self.append(event, sync=False)
        self.sync()

    def sync(self) -> None:
        if self._fh is not None:
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def _close_fh(self) -> None:
        if self._fh is not None:
            self.sync()
            self._fh.close()
            self._fh = None

    def close(self) -> None:
        self._close_fh()

    # -- reading --------------------------------------------------------

    def replay(self, from_seq: int = 1) -> Iterator[Event]:
        """Yield events with seq >= from_seq, in order, gap-free."""
        expected = None
        for first_seq, path in self._segments():
            if self._fh is not None and path == self._active:
                self._fh.flush()
            data = path.read_bytes()
            offset = 1
            while offset + HEADER.size <= len(data):
                rec_seq, crc, length = HEADER.unpack_from(data, offset)
                body = data[offset + HEADER.size : offset + HEADER.size + length]
                if len(body) < length or zlib.crc32(body) != crc:
                    break
                offset += HEADER.size + length
                if expected is not None and rec_seq != expected:
                    raise LogCorruption(f"gap in log: {rec_seq} after {expected - 1}")
                expected = rec_seq + 1
                if rec_seq >= from_seq:
                    yield decode_event(body)
