"""Domain types for the burst propagation engine.

Identifiers are opaque strings (``u3``, ``c1``, ``p17``). Timestamps are UTC
milliseconds assigned by whoever owns the clock; the engine never reads wall
time itself.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

UserId = str
ChannelId = str
PostId = str
EventSeq = int

HANDLE_RE = re.compile(r"^[a-z0-9_-]{1,32}$")
CHANNEL_NAME_RE = re.compile(r"^#[a-z0-9-]{1,48}$")

POST_KINDS = ("original", "reply", "quote")

EVENT_KINDS = (
    "UserCreated",
    "ChannelCreated",
    "ChannelJoined",
    "ChannelLeft",
    "TeamInvited",
    "TeamInviteAccepted",
    "TeamInviteDeclined",
    "TeamMemberRemoved",
    "PostCreated",
    "BurstVoteCast",
    "PostBurst",
    "PostRetracted",
    "ChannelBlockedRetroactively",
    "ReactionAdded",
    "ReactionRemoved",
    "PostDeleted",
)

MAX_BODY_CHARS = 2000

DEFAULT_EMOJI_ALLOWLIST = ("👍", "❤️", "😂", "🎉", "😮", "😢")


@dataclass
class ThresholdPolicy:
    """Size-proportional vote thresholds, clamped to [min, max].

    ``everyone_ratio`` must exceed ``ratio`` so the platform-wide channel is
    never cheaper than an ordinary channel of the same size.
    """

    ratio: float = 0.05
    min_threshold: int = 1
    max_threshold: int = 50
    everyone_ratio: float = 0.15

    def validate(self) -> None:
        if not (0 < self.ratio <= 1):
            raise ValueError("ratio must be in (0, 1]")
        if not (1 <= self.min_threshold <= self.max_threshold):
            raise ValueError("need 1 <= min_threshold <= max_threshold")
        if self.everyone_ratio <= self.ratio:
            raise ValueError("everyone_ratio must exceed ratio")


@dataclass
class EngineConfig:
    policy: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    max_team_size: int = 50
    emoji_allowlist: tuple = DEFAULT_EMOJI_ALLOWLIST

    def validate(self) -> None:
        self.policy.validate()
        if self.max_team_size < 1:
            raise ValueError("max_team_size must be positive")


@dataclass
class User:
    id: UserId
    handle: str
    display_name: str
    team_member_ids: set = field(default_factory=set)
    pending_team_invites: set = field(default_factory=set)
    joined_channels: set = field(default_factory=set)
    created_at: int = 0


@dataclass
class Channel:
    id: ChannelId
    name: str
    description: str = ""
    member_ids: set = field(default_factory=set)
    creator: UserId = ""
    is_everyone: bool = False
    threshold_override: Optional[int] = None
    created_at: int = 0


@dataclass
class Post:
    id: PostId
    author: UserId
    body: str
    attachment: Optional[str] = None  # hex sha-256 of a stored blob
    kind: str = "original"
    parent: Optional[PostId] = None
    quoted: Optional[PostId] = None
    suggested_channels: list = field(default_factory=list)
    blocked_channels: set = field(default_factory=set)
    created_at: int = 0
    created_seq: EventSeq = 0  # seq of the PostCreated event; feed tie-break
    deleted: bool = False


@dataclass
class BurstState:
    """Per-post voting ledger. Voter identities live here and in the event
    log only; no read path may surface them."""

    votes: dict = field(default_factory=dict)  # ChannelId -> set[UserId]
    burst_into: dict = field(default_factory=dict)  # ChannelId -> timestamp
    retracted_from: set = field(default_factory=set)


@dataclass
class Event:
    seq: EventSeq
    at: int
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "at": self.at, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(seq=d["seq"], at=d["at"], kind=d["kind"], payload=d["payload"])


@dataclass
class Notification:
    id: str
    recipient: UserId
    kind: str  # TeamReview | PostBurst | TeamInvite
    subject: str  # PostId or UserId
    created_at: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "recipient": self.recipient,
            "kind": self.kind,
            "subject": self.subject,
            "created_at": self.created_at,
        }


@dataclass
class BurstOption:
    channel: ChannelId
    name: str
    votes: int
    threshold: int
    suggested: bool


@dataclass
class BurstOutcome:
    """Per-channel result of a cast_burst command."""

    status: str  # progress | burst | already_voted | rejected
    votes: int = 0
    threshold: int = 0
    reason: Optional[str] = None  # set when status == rejected

    def to_dict(self) -> dict:
        d = {"status": self.status, "votes": self.votes, "threshold": self.threshold}
        if self.reason is not None:
            d["reason"] = self.reason
        return d


@dataclass
class FeedEntry:
    post: PostId
    channel_tags: set
    team_banner: Optional[UserId]
    burst_progress: list  # list[BurstOption]
    replies: list = field(default_factory=list)  # nested FeedEntry, oldest first
