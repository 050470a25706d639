from .blobs import BlobStore, BlobTooLarge, UnknownBlob
from .eventlog import EventLog, LogCorruption, decode_event, encode_event
from .snapshots import SnapshotStore

__all__ = [
    "BlobStore",
    "BlobTooLarge",
    "UnknownBlob",
    "EventLog",
    "LogCorruption",
    "decode_event",
    "encode_event",
    "SnapshotStore",
]
