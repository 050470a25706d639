"""The burst-protocol state machine.

The engine is pure and deterministic: commands validate against current
state, emit events, and every mutation happens inside ``_apply`` so that
replaying the event stream from scratch reconstructs the exact same state.
Timestamps come from an injected clock; the engine never touches wall time,
randomness, or I/O.
"""
from __future__ import annotations

import json
import time
from typing import Callable, Iterable, Optional

from .. import errors
from .threshold import compute_threshold
from .types import (
    CHANNEL_NAME_RE,
    HANDLE_RE,
    MAX_BODY_CHARS,
    POST_KINDS,
    BurstOption,
    BurstOutcome,
    BurstState,
    Channel,
    ChannelId,
    EngineConfig,
    Event,
    FeedEntry,
    Notification,
    Post,
    PostId,
    User,
    UserId,
)


def _now_ms() -> int:
    return int(time.time() * 1000)


def _id_num(identifier: str) -> int:
    return int(identifier[1:])


class Engine:
    def __init__(
        self,
        config: Optional[EngineConfig] = None,
        clock: Optional[Callable[[], int]] = None,
        on_event: Optional[Callable[[Event], None]] = None,
    ):
        self.config = config or EngineConfig()
        self.config.validate()
        self.clock = clock or _now_ms
        self.on_event = on_event

        self.seq = 0
        self.users: dict[UserId, User] = {}
        self.channels: dict[ChannelId, Channel] = {}
        self.posts: dict[PostId, Post] = {}
        self.burst_states: dict[PostId, BurstState] = {}
        self.reactions: dict[PostId, set] = {}  # set of (user, emoji)
        self.notifications: list[Notification] = []
        self.everyone_id: Optional[ChannelId] = None

        self._handles: dict[str, UserId] = {}
        self._channel_names: dict[str, ChannelId] = {}
        self._user_n = 0
        self._channel_n = 0
        self._post_n = 0
        self._notif_n = 0

    # ------------------------------------------------------------------
    # event plumbing

    def _emit(self, kind: str, payload: dict) -> Event:
        event = Event(seq=self.seq + 1, at=self.clock(), kind=kind, payload=payload)
        self.apply(event)
        if self.on_event is not None:
            self.on_event(event)
        return event

    def apply(self, event: Event) -> None:
        """Fold one event into state. Events are trusted; no validation."""
        if event.seq != self.seq + 1:
            raise ValueError(f"event seq {event.seq} does not follow {self.seq}")
        self.seq = event.seq
        handler = getattr(self, "_apply_" + event.kind)
        handler(event.at, event.payload)

    def apply_events(self, events: Iterable[Event]) -> None:
        for event in events:
            self.apply(event)

    # ------------------------------------------------------------------
    # apply handlers (pure state folds)

    def _apply_UserCreated(self, at: int, p: dict) -> None:
        user = User(
            id=p["user_id"],
            handle=p["handle"],
            display_name=p["display_name"],
            created_at=at,
        )
        self.users[user.id] = user
        self._handles[user.handle] = user.id
        self._user_n = max(self._user_n, _id_num(user.id))
        if self.everyone_id is not None:
            self.channels[self.everyone_id].member_ids.add(user.id)
            user.joined_channels.add(self.everyone_id)

    def _apply_ChannelCreated(self, at: int, p: dict) -> None:
        channel = Channel(
            id=p["channel_id"],
            name=p["name"],
            description=p["description"],
            creator=p["creator"],
            is_everyone=p["is_everyone"],
            threshold_override=p["threshold_override"],
            created_at=at,
        )
        self.channels[channel.id] = channel
        self._channel_names[channel.name] = channel.id
        self._channel_n = max(self._channel_n, _id_num(channel.id))
        if channel.is_everyone:
            self.everyone_id = channel.id
            for user in self.users.values():
                channel.member_ids.add(user.id)
                user.joined_channels.add(channel.id)
        else:
            channel.member_ids.add(channel.creator)
            self.users[channel.creator].joined_channels.add(channel.id)

    def _apply_ChannelJoined(self, at: int, p: dict) -> None:
        self.channels[p["channel_id"]].member_ids.add(p["user_id"])
        self.users[p["user_id"]].joined_channels.add(p["channel_id"])

    def _apply_ChannelLeft(self, at: int, p: dict) -> None:
        self.channels[p["channel_id"]].member_ids.discard(p["user_id"])
        self.users[p["user_id"]].joined_channels.discard(p["channel_id"])

    def _apply_TeamInvited(self, at: int, p: dict) -> None:
        self.users[p["owner"]].pending_team_invites.add(p["invitee"])
        self._notify(p["invitee"], "TeamInvite", p["owner"], at)

    def _apply_TeamInviteAccepted(self, at: int, p: dict) -> None:
        owner = self.users[p["owner"]]
        owner.pending_team_invites.discard(p["invitee"])
        owner.team_member_ids.add(p["invitee"])

    def _apply_TeamInviteDeclined(self, at: int, p: dict) -> None:
        self.users[p["owner"]].pending_team_invites.discard(p["invitee"])

    def _apply_TeamMemberRemoved(self, at: int, p: dict) -> None:
        self.users[p["owner"]].team_member_ids.discard(p["member"])

    def _apply_PostCreated(self, at: int, p: dict) -> None:
        post = Post(
            id=p["post_id"],
            author=p["author"],
            body=p["body"],
            attachment=p["attachment"],
            kind=p["kind"],
            parent=p["parent"],
            quoted=p["quoted"],
            suggested_channels=list(p["suggested"]),
            blocked_channels=set(p["blocked"]),
            created_at=at,
            created_seq=self.seq,
        )
        self.posts[post.id] = post
        self.burst_states[post.id] = BurstState()
        self.reactions[post.id] = set()
        self._post_n = max(self._post_n, _id_num(post.id))
        for member in sorted(self.users[post.author].team_member_ids):
            self._notify(member, "TeamReview", post.id, at)

    def _apply_BurstVoteCast(self, at: int, p: dict) -> None:
        state = self.burst_states[p["post_id"]]
        state.votes.setdefault(p["channel_id"], set()).add(p["voter"])

    def _apply_PostBurst(self, at: int, p: dict) -> None:
        state = self.burst_states[p["post_id"]]
        state.burst_into[p["channel_id"]] = at
        self._notify(self.posts[p["post_id"]].author, "PostBurst", p["post_id"], at)

    def _apply_PostRetracted(self, at: int, p: dict) -> None:
        state = self.burst_states[p["post_id"]]
        state.burst_into.pop(p["channel_id"], None)
        state.votes.pop(p["channel_id"], None)
        state.retracted_from.add(p["channel_id"])

    def _apply_ChannelBlockedRetroactively(self, at: int, p: dict) -> None:
        post = self.posts[p["post_id"]]
        post.blocked_channels.add(p["channel_id"])
        if p["channel_id"] in post.suggested_channels:
            post.suggested_channels.remove(p["channel_id"])
        state = self.burst_states[post.id]
        state.votes.pop(p["channel_id"], None)
        # blocking subsumes a prior retraction; the blocked, burst and
        # retracted sets stay pairwise disjoint
        state.retracted_from.discard(p["channel_id"])

    def _apply_ReactionAdded(self, at: int, p: dict) -> None:
        self.reactions[p["post_id"]].add((p["user_id"], p["emoji"]))

    def _apply_ReactionRemoved(self, at: int, p: dict) -> None:
        self.reactions[p["post_id"]].discard((p["user_id"], p["emoji"]))

    def _apply_PostDeleted(self, at: int, p: dict) -> None:
        self.posts[p["post_id"]].deleted = True

    def _notify(self, recipient: UserId, kind: str, subject: str, at: int) -> None:
        self._notif_n += 1
        self.notifications.append(
            Notification(
                id=f"n{self._notif_n}",
                recipient=recipient,
                kind=kind,
                subject=subject,
                created_at=at,
            )
        )

    # ------------------------------------------------------------------
    # lookup helpers

    def _user(self, user_id: UserId) -> User:
        try:
            return self.users[user_id]
        except KeyError:
            raise errors.UnknownUser(f"no such user: {user_id}") from None

    def _channel(self, channel_id: ChannelId) -> Channel:
        try:
            return self.channels[channel_id]
        except KeyError:
            raise errors.UnknownChannel(f"no such channel: {channel_id}") from None

    def _post(self, post_id: PostId) -> Post:
        try:
            return self.posts[post_id]
        except KeyError:
            raise errors.UnknownPost(f"no such post: {post_id}") from None

    def user_by_handle(self, handle: str) -> Optional[User]:
        uid = self._handles.get(handle)
        return self.users.get(uid) if uid else None

    def channel_by_name(self, name: str) -> Optional[Channel]:
        cid = self._channel_names.get(name)
        return self.channels.get(cid) if cid else None

    def threshold_for(self, channel_id: ChannelId) -> int:
        channel = self._channel(channel_id)
        others = [c for c in self.channels.values() if c.id != channel_id]
        return compute_threshold(channel, self.config.policy, others)

    # ------------------------------------------------------------------
    # commands: users, channels, teams

    def create_user(self, handle: str, display_name: str = "") -> UserId:
        if not HANDLE_RE.match(handle):
            raise errors.BadHandle(f"bad handle: {handle!r}")
        if handle in self._handles:
            raise errors.DuplicateHandle(f"handle taken: {handle}")
        user_id = f"u{self._user_n + 1}"
        self._emit(
            "UserCreated",
            {"user_id": user_id, "handle": handle, "display_name": display_name or handle},
        )
        return user_id

    def create_channel(
        self,
        creator: UserId,
        name: str,
        description: str = "",
        threshold_override: Optional[int] = None,
        is_everyone: bool = False,
    ) -> ChannelId:
        self._user(creator)
        if not CHANNEL_NAME_RE.match(name):
            raise errors.BadName(f"bad channel name: {name!r}")
        if name in self._channel_names:
            raise errors.DuplicateName(f"channel name taken: {name}")
        if is_everyone and self.everyone_id is not None:
            raise errors.DuplicateName("everyone channel already exists")
        if threshold_override is not None and threshold_override < 1:
            raise errors.BadName("threshold_override must be positive")
        channel_id = f"c{self._channel_n + 1}"
        self._emit(
            "ChannelCreated",
            {
                "channel_id": channel_id,
                "name": name,
                "description": description,
                "creator": creator,
                "is_everyone": is_everyone,
                "threshold_override": threshold_override,
            },
        )
        return channel_id

    def bootstrap(self, admin_handle: str = "admin") -> tuple:
        """Create the admin user and the everyone channel on a fresh store."""
        admin_id = self.create_user(admin_handle)
        everyone_id = self.create_channel(
            admin_id, "#everyone", "the whole platform", is_everyone=True
        )
        return admin_id, everyone_id

    def join_channel(self, user_id: UserId, channel_id: ChannelId) -> None:
        user = self._user(user_id)
        channel = self._channel(channel_id)
        if user_id in channel.member_ids:
            raise errors.AlreadyMember(f"{user_id} already in {channel.name}")
        self._emit("ChannelJoined", {"user_id": user_id, "channel_id": channel_id})

    def leave_channel(self, user_id: UserId, channel_id: ChannelId) -> None:
        self._user(user_id)
        channel = self._channel(channel_id)
        if channel.is_everyone:
            raise errors.CannotLeaveEveryone("cannot leave the everyone channel")
        if user_id not in channel.member_ids:
            raise errors.NotAMember(f"{user_id} not in {channel.name}")
        if len(channel.member_ids) == 1:
            raise errors.LastMember(f"{channel.name} must keep at least one member")
        self._emit("ChannelLeft", {"user_id": user_id, "channel_id": channel_id})

    def invite_to_team(self, owner: UserId, invitee: UserId) -> None:
        owner_user = self._user(owner)
        self._user(invitee)
        if owner == invitee:
            raise errors.SelfInvite("cannot invite yourself to your own team")
        if invitee in owner_user.team_member_ids:
            raise errors.AlreadyMember(f"{invitee} already on {owner}'s team")
        if invitee in owner_user.pending_team_invites:
            raise errors.AlreadyInvited(f"{invitee} already invited by {owner}")
        committed = len(owner_user.team_member_ids) + len(owner_user.pending_team_invites)
        if committed >= self.config.max_team_size:
            raise errors.TeamFull(f"team cap {self.config.max_team_size} reached")
        self._emit("TeamInvited", {"owner": owner, "invitee": invitee})

    def accept_team_invite(self, invitee: UserId, owner: UserId) -> None:
        owner_user = self._user(owner)
        self._user(invitee)
        if invitee not in owner_user.pending_team_invites:
            raise errors.NotInvited(f"{invitee} was not invited by {owner}")
        self._emit("TeamInviteAccepted", {"owner": owner, "invitee": invitee})

    def decline_team_invite(self, invitee: UserId, owner: UserId) -> None:
        owner_user = self._user(owner)
        self._user(invitee)
        if invitee not in owner_user.pending_team_invites:
            raise errors.NotInvited(f"{invitee} was not invited by {owner}")
        self._emit("TeamInviteDeclined", {"owner": owner, "invitee": invitee})

    def remove_team_member(self, owner: UserId, member: UserId) -> None:
        owner_user = self._user(owner)
        self._user(member)
        if member not in owner_user.team_member_ids:
            raise errors.NotOnTeam(f"{member} not on {owner}'s team")
        self._emit("TeamMemberRemoved", {"owner": owner, "member": member, "removed_by": owner})

    def leave_team(self, member: UserId, owner: UserId) -> None:
        owner_user = self._user(owner)
        self._user(member)
        if member not in owner_user.team_member_ids:
            raise errors.NotOnTeam(f"{member} not on {owner}'s team")
        self._emit("TeamMemberRemoved", {"owner": owner, "member": member, "removed_by": member})

    # ------------------------------------------------------------------
    # commands: posts and bursting

    def create_post(
        self,
        author: UserId,
        body: str,
        attachment: Optional[str] = None,
        kind: str = "original",
        parent: Optional[PostId] = None,
        quoted: Optional[PostId] = None,
        suggested: Optional[list] = None,
        blocked: Optional[set] = None,
    ) -> PostId:
        author_user = self._user(author)
        suggested = list(dict.fromkeys(suggested or []))
        blocked = set(blocked or ())
        if kind not in POST_KINDS:
            raise errors.BadPost(f"unknown post kind: {kind}")
        if len(body) > MAX_BODY_CHARS:
            raise errors.BadPost(f"body exceeds {MAX_BODY_CHARS} characters")
        if not body and not attachment:
            raise errors.BadPost("body required unless an attachment is present")
        if (kind == "reply") != (parent is not None):
            raise errors.BadPost("parent is required for replies and only replies")
        if (kind == "quote") != (quoted is not None):
            raise errors.BadPost("quoted is required for quotes and only quotes")
        for cid in suggested + sorted(blocked):
            self._channel(cid)
        not_joined = [c for c in suggested if c not in author_user.joined_channels]
        if not_joined:
            raise errors.SuggestedChannelNotJoined(
                f"author has not joined: {', '.join(not_joined)}"
            )
        if set(suggested) & blocked:
            raise errors.SuggestBlockOverlap("a channel cannot be both suggested and blocked")
        if parent is not None and not self.can_view(author, parent):
            raise errors.ParentNotVisible("cannot reply to a post you cannot see")
        if quoted is not None and not self.can_view(author, quoted):
            raise errors.ParentNotVisible("cannot quote a post you cannot see")
        post_id = f"p{self._post_n + 1}"
        self._emit(
            "PostCreated",
            {
                "post_id": post_id,
                "author": author,
                "body": body,
                "attachment": attachment,
                "kind": kind,
                "parent": parent,
                "quoted": quoted,
                "suggested": suggested,
                "blocked": sorted(blocked),
            },
        )
        return post_id

    def can_view(self, viewer: UserId, post_id: PostId) -> bool:
        viewer_user = self._user(viewer)
        post = self._post(post_id)
        if post.deleted:
            return viewer == post.author
        if viewer == post.author:
            return True
        if viewer in self.users[post.author].team_member_ids:
            return True
        burst_channels = self.burst_states[post_id].burst_into.keys()
        return bool(viewer_user.joined_channels & set(burst_channels))

    def burst_options(self, viewer: UserId, post_id: PostId) -> list:
        """Channels the viewer could nominate this post into, suggested ones
        first, with live vote counts. The source of the k/t progress display."""
        if not self.can_view(viewer, post_id):
            raise errors.NotVisible("post not visible to viewer")
        viewer_user = self.users[viewer]
        post = self.posts[post_id]
        state = self.burst_states[post_id]

        def eligible(cid: ChannelId) -> bool:
            return (
                cid in viewer_user.joined_channels
                and cid not in post.blocked_channels
                and cid not in state.burst_into
                and cid not in state.retracted_from
            )

        suggested = [c for c in post.suggested_channels if eligible(c)]
        rest = sorted(
            (c for c in viewer_user.joined_channels if eligible(c) and c not in suggested),
            key=lambda c: self.channels[c].name,
        )
        options = []
        for cid in suggested + rest:
            options.append(
                BurstOption(
                    channel=cid,
                    name=self.channels[cid].name,
                    votes=len(state.votes.get(cid, ())),
                    threshold=self.threshold_for(cid),
                    suggested=cid in post.suggested_channels,
                )
            )
        return options

    def cast_burst(self, voter: UserId, post_id: PostId, channels: Iterable[ChannelId]) -> dict:
        """Nominate a post toward one or more channel thresholds.

        Channels are handled independently; the whole batch applies
        atomically. Thresholds are read at vote time and a fired burst is
        never revoked by later membership changes.
        """
        self._user(voter)
        post = self._post(post_id)
        if not self.can_view(voter, post_id):
            raise errors.NotVisible("post not visible to voter")
        if voter == post.author:
            raise errors.SelfBurst("authors cannot burst their own posts")
        channel_list = list(dict.fromkeys(channels))
        for cid in channel_list:
            self._channel(cid)

        state = self.burst_states[post_id]
        outcomes: dict[ChannelId, BurstOutcome] = {}
        for cid in channel_list:
            if cid in post.blocked_channels:
                outcomes[cid] = BurstOutcome(status="rejected", reason="blocked")
                continue
            if cid in state.burst_into:
                outcomes[cid] = BurstOutcome(status="rejected", reason="already_burst")
                continue
            if cid in state.retracted_from:
                outcomes[cid] = BurstOutcome(status="rejected", reason="retracted")
                continue
            if voter not in self.channels[cid].member_ids:
                outcomes[cid] = BurstOutcome(status="rejected", reason="not_a_member")
                continue
            threshold = self.threshold_for(cid)
            if voter in state.votes.get(cid, ()):
                outcomes[cid] = BurstOutcome(
                    status="already_voted",
                    votes=len(state.votes[cid]),
                    threshold=threshold,
                )
                continue
            self._emit("BurstVoteCast", {"post_id": post_id, "channel_id": cid, "voter": voter})
            votes = len(state.votes[cid])
            if votes >= threshold:
                self._emit(
                    "PostBurst",
                    {"post_id": post_id, "channel_id": cid, "votes": votes, "threshold": threshold},
                )
                outcomes[cid] = BurstOutcome(status="burst", votes=votes, threshold=threshold)
            else:
                outcomes[cid] = BurstOutcome(status="progress", votes=votes, threshold=threshold)
        return outcomes

    def retract_from_channel(self, author: UserId, post_id: PostId, channel_id: ChannelId) -> None:
        post = self._post(post_id)
        self._channel(channel_id)
        if author != post.author:
            raise errors.NotAuthor("only the author may retract")
        if channel_id not in self.burst_states[post_id].burst_into:
            raise errors.NotBurstThere(f"post has not burst into {channel_id}")
        self._emit("PostRetracted", {"post_id": post_id, "channel_id": channel_id})

    def block_channel_retroactive(
        self, author: UserId, post_id: PostId, channel_id: ChannelId
    ) -> None:
        post = self._post(post_id)
        self._channel(channel_id)
        if author != post.author:
            raise errors.NotAuthor("only the author may block channels")
        if channel_id in self.burst_states[post_id].burst_into:
            raise errors.AlreadyBurstUseRetract("retract from the channel before blocking it")
        if channel_id in post.blocked_channels:
            return  # idempotent
        self._emit("ChannelBlockedRetroactively", {"post_id": post_id, "channel_id": channel_id})

    def delete_post(self, author: UserId, post_id: PostId) -> None:
        post = self._post(post_id)
        if author != post.author:
            raise errors.NotAuthor("only the author may delete")
        if post.deleted:
            return  # idempotent tombstone
        self._emit("PostDeleted", {"post_id": post_id})

    # ------------------------------------------------------------------
    # commands: reactions

    def add_reaction(self, user_id: UserId, post_id: PostId, emoji: str) -> None:
        self._user(user_id)
        self._post(post_id)
        if emoji not in self.config.emoji_allowlist:
            raise errors.EmojiNotAllowed(f"emoji not in allow-list: {emoji!r}")
        if not self.can_view(user_id, post_id):
            raise errors.NotVisible("post not visible")
        if (user_id, emoji) in self.reactions[post_id]:
            return  # at most one per (post, user, emoji)
        self._emit("ReactionAdded", {"post_id": post_id, "user_id": user_id, "emoji": emoji})

    def remove_reaction(self, user_id: UserId, post_id: PostId, emoji: str) -> None:
        self._user(user_id)
        self._post(post_id)
        if (user_id, emoji) not in self.reactions[post_id]:
            return
        self._emit("ReactionRemoved", {"post_id": post_id, "user_id": user_id, "emoji": emoji})

    # ------------------------------------------------------------------
    # reads: feed, directory, reactions

    def assemble_feed(
        self,
        viewer: UserId,
        channel_filter: Optional[ChannelId] = None,
        cursor: Optional[str] = None,
        limit: int = 50,
    ) -> tuple:
        """Reverse-chronological feed for a viewer.

        Returns (entries, next_cursor). Replies are nested under their parent
        when the parent is itself in the feed; ordering and pagination key is
        (created_at, created_seq) descending.
        """
        viewer_user = self._user(viewer)
        if channel_filter is not None:
            channel = self._channel(channel_filter)
            if viewer not in channel.member_ids:
                raise errors.NotAMember("join the channel to read its feed")

        visible = [
            p
            for p in self.posts.values()
            if not p.deleted and self.can_view(viewer, p.id)
        ]
        visible_ids = {p.id for p in visible}

        if channel_filter is not None:
            matches = [
                p for p in visible if channel_filter in self.burst_states[p.id].burst_into
            ]
            match_ids = {p.id for p in matches}
            top = [
                p
                for p in matches
                if p.kind != "reply" or p.parent not in match_ids
            ]
        else:
            top = [p for p in visible if p.kind != "reply" or p.parent not in visible_ids]

        children: dict[PostId, list] = {}
        for p in visible:
            if p.kind == "reply" and p.parent in visible_ids:
                children.setdefault(p.parent, []).append(p)

        def sort_key(p: Post):
            return (p.created_at, p.created_seq)

        top.sort(key=sort_key, reverse=True)
        if cursor is not None:
            after_at, after_seq = (int(x) for x in cursor.split("."))
            top = [p for p in top if sort_key(p) < (after_at, after_seq)]

        page = top[:limit]
        next_cursor = None
        if len(top) > limit and page:
            last = page[-1]
            next_cursor = f"{last.created_at}.{last.created_seq}"

        def entry_for(p: Post) -> FeedEntry:
            state = self.burst_states[p.id]
            tags = viewer_user.joined_channels & set(state.burst_into)
            banner = p.author if viewer in self.users[p.author].team_member_ids else None
            progress = self.burst_options(viewer, p.id)
            replies = sorted(children.get(p.id, []), key=sort_key)
            return FeedEntry(
                post=p.id,
                channel_tags=tags,
                team_banner=banner,
                burst_progress=progress,
                replies=[entry_for(r) for r in replies],
            )

        return [entry_for(p) for p in page], next_cursor

    def channel_directory(self) -> list:
        """Public channel listing with member counts and live thresholds."""
        rows = []
        for channel in sorted(self.channels.values(), key=lambda c: c.name):
            rows.append(
                {
                    "id": channel.id,
                    "name": channel.name,
                    "description": channel.description,
                    "member_count": len(channel.member_ids),
                    "threshold": self.threshold_for(channel.id),
                    "is_everyone": channel.is_everyone,
                }
            )
        return rows

    def reactions_for(self, viewer: UserId, post_id: PostId) -> dict:
        """Per-emoji reactor handles. Reactions are attributed; only burst
        votes are anonymous."""
        if not self.can_view(viewer, post_id):
            raise errors.NotVisible("post not visible")
        by_emoji: dict[str, list] = {}
        for user_id, emoji in self.reactions[post_id]:
            by_emoji.setdefault(emoji, []).append(self.users[user_id].handle)
        return {emoji: sorted(handles) for emoji, handles in by_emoji.items()}

    # ------------------------------------------------------------------
    # canonical state serialization (snapshots, replay-equality checks)

    def to_state_dict(self) -> dict:
        return {
            "seq": self.seq,
            "everyone_id": self.everyone_id,
            "users": {
                u.id: {
                    "handle": u.handle,
                    "display_name": u.display_name,
                    "team_member_ids": sorted(u.team_member_ids),
                    "pending_team_invites": sorted(u.pending_team_invites),
                    "joined_channels": sorted(u.joined_channels),
                    "created_at": u.created_at,
                }
                for u in self.users.values()
            },
            "channels": {
                c.id: {
                    "name": c.name,
                    "description": c.description,
                    "member_ids": sorted(c.member_ids),
                    "creator": c.creator,
                    "is_everyone": c.is_everyone,
                    "threshold_override": c.threshold_override,
                    "created_at": c.created_at,
                }
                for c in self.channels.values()
            },
            "posts": {
                p.id: {
                    "author": p.author,
                    "body": p.body,
                    "attachment": p.attachment,
                    "kind": p.kind,
                    "parent": p.parent,
                    "quoted": p.quoted,
                    "suggested_channels": list(p.suggested_channels),
                    "blocked_channels": sorted(p.blocked_channels),
                    "created_at": p.created_at,
                    "created_seq": p.created_seq,
                    "deleted": p.deleted,
                }
                for p in self.posts.values()
            },
            "burst_states": {
                pid: {
                    "votes": {c: sorted(v) for c, v in sorted(s.votes.items())},
                    "burst_into": dict(sorted(s.burst_into.items())),
                    "retracted_from": sorted(s.retracted_from),
                }
                for pid, s in self.burst_states.items()
            },
            "reactions": {
                pid: sorted(list(pair) for pair in pairs)
                for pid, pairs in self.reactions.items()
            },
            "notifications": [n.to_dict() for n in self.notifications],
        }

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_state_dict(), sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_state_dict(
        cls,
        state: dict,
        config: Optional[EngineConfig] = None,
        clock: Optional[Callable[[], int]] = None,
    ) -> "Engine":
        eng = cls(config=config, clock=clock)
        eng.seq = state["seq"]
        eng.everyone_id = state["everyone_id"]
        for uid, u in state["users"].items():
            eng.users[uid] = User(
                id=uid,
                handle=u["handle"],
                display_name=u["display_name"],
                team_member_ids=set(u["team_member_ids"]),
                pending_team_invites=set(u["pending_team_invites"]),
                joined_channels=set(u["joined_channels"]),
                created_at=u["created_at"],
            )
            eng._handles[u["handle"]] = uid
            eng._user_n = max(eng._user_n, _id_num(uid))
        for cid, c in state["channels"].items():
            eng.channels[cid] = Channel(
                id=cid,
                name=c["name"],
                description=c["description"],
                member_ids=set(c["member_ids"]),
                creator=c["creator"],
                is_everyone=c["is_everyone"],
                threshold_override=c["threshold_override"],
                created_at=c["created_at"],
            )
            eng._channel_names[c["name"]] = cid
            eng._channel_n = max(eng._channel_n, _id_num(cid))
        for pid, p in state["posts"].items():
            eng.posts[pid] = Post(
                id=pid,
                author=p["author"],
                body=p["body"],
                attachment=p["attachment"],
                kind=p["kind"],
                parent=p["parent"],
                quoted=p["quoted"],
                suggested_channels=list(p["suggested_channels"]),
                blocked_channels=set(p["blocked_channels"]),
                created_at=p["created_at"],
                created_seq=p["created_seq"],
                deleted=p["deleted"],
            )
            eng._post_n = max(eng._post_n, _id_num(pid))
        for pid, s in state["burst_states"].items():
            eng.burst_states[pid] = BurstState(
                votes={c: set(v) for c, v in s["votes"].items()},
                burst_into=dict(s["burst_into"]),
                retracted_from=set(s["retracted_from"]),
            )
        for pid, pairs in state["reactions"].items():
            eng.reactions[pid] = {tuple(pair) for pair in pairs}
        for n in state["notifications"]:
            eng.notifications.append(
                Notification(
                    id=n["id"],
                    recipient=n["recipient"],
                    kind=n["kind"],
                    subject=n["subject"],
                    created_at=n["created_at"],
                )
            )
            eng._notif_n = max(eng._notif_n, _id_num(n["id"]))
        return eng

    @classmethod
    def replay(
        cls,
        events: Iterable[Event],
        config: Optional[EngineConfig] = None,
        clock: Optional[Callable[[], int]] = None,
    ) -> "Engine":
        eng = cls(config=config, clock=clock)
        eng.apply_events(events)
        return eng
