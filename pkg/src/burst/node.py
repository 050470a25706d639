"""Single-writer runtime binding the engine to durable storage.

All mutations are funneled through ``execute`` under one lock; events a
command produced are appended to the log (one fsync per command) before the
result is returned, so an acknowledged command is durable. Reads take the
same lock briefly; the engine itself never blocks on I/O.
"""
from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Callable, Optional

from .core.engine import Engine
from .core.types import EngineConfig, Event, Notification
from .store import BlobStore, EventLog, SnapshotStore

SNAPSHOT_EVERY = 10_000


class Node:
    def __init__(
        self,
        data_dir,
        config: Optional[EngineConfig] = None,
        clock: Optional[Callable[[], int]] = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log = EventLog(self.data_dir)
        self.snapshots = SnapshotStore(self.data_dir)
        self.blobs = BlobStore(self.data_dir)
        self.lock = threading.RLock()

        loaded = self.snapshots.load_latest()
        if loaded is not None:
            state, as_of = loaded
            self.engine = Engine.from_state_dict(state, config=config, clock=clock)
            self.engine.apply_events(self.log.replay(from_seq=as_of + 1))
        else:
            self.engine = Engine(config=config, clock=clock)
            self.engine.apply_events(self.log.replay())
        self._last_snapshot_seq = self.engine.seq

        self._pending: list[Event] = []
        self.engine.on_event = self._pending.append
        self._notified = len(self.engine.notifications)
        self._subscribers: list = []  # (recipient UserId, queue.Queue)

        self._acks_path = self.data_dir / "notification_acks.json"
        self.acked: set = set()
        if self._acks_path.exists():
            self.acked = set(json.loads(self._acks_path.read_text()))

    # -- writes ---------------------------------------------------------

    def execute(self, fn: Callable[[Engine], object]):
        """Run one command against the engine; durable before return."""
        with self.lock:
            try:
                result = fn(self.engine)
            finally:
                if self._pending:
                    self.log.append_batch(self._pending)
                    self._pending.clear()
            self._dispatch_notifications()
            if self.engine.seq - self._last_snapshot_seq >= SNAPSHOT_EVERY:
                self.snapshot()
            return result

    def snapshot(self) -> None:
        with self.lock:
            self.snapshots.save(self.engine.to_state_dict(), self.engine.seq)
            self._last_snapshot_seq = self.engine.seq

    def close(self) -> None:
        with self.lock:
            if self.engine.seq > self._last_snapshot_seq:
                self.snapshot()
            self.log.close()

    # -- reads ----------------------------------------------------------

    def read(self, fn: Callable[[Engine], object]):
        with self.lock:
            return fn(self.engine)

    # -- notifications --------------------------------------------------

    def _dispatch_notifications(self) -> None:
        fresh = self.engine.notifications[self._notified :]
        self._notified = len(self.engine.notifications)
        for notif in fresh:
            for recipient, q in list(self._subscribers):
                if recipient == notif.recipient:
                    q.put(notif)

    def subscribe(self, recipient: str) -> "queue.Queue[Notification]":
        q: queue.Queue = queue.Queue()
        with self.lock:
            self._subscribers.append((recipient, q))
        return q

    def unsubscribe(self, q) -> None:
        with self.lock:
            self._subscribers = [(r, sq) for r, sq in self._subscribers if sq is not q]

    def notifications_for(self, recipient: str, since: int = 0) -> list:
        with self.lock:
            out = []
            for notif in self.engine.notifications:
                if notif.recipient != recipient:
                    continue
                if int(notif.id[1:]) <= since:
                    continue
                d = notif.to_dict()
                d["acked"] = notif.id in self.acked
                out.append(d)
            return out

    def ack_notification(self, recipient: str, notif_id: str) -> bool:
        with self.lock:
            for notif in self.engine.notifications:
                if notif.id == notif_id and notif.recipient == recipient:
                    self.acked.add(notif_id)
                    self._acks_path.write_text(json.dumps(sorted(self.acked)))
                    return True
            return False
