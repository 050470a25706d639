"""JSON-over-HTTP surface for the burst engine.

Every route wraps a core operation; domain preconditions surface as 422
with the core error code, authentication failures as 401, and the
onboarding gate as 409. No response ever carries burst-voter identities:
vote data leaves the engine only as counts and thresholds.
"""
from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .. import errors
from ..config import AppConfig
from ..core.types import FeedEntry
from ..node import Node
from ..store.blobs import BlobTooLarge, UnknownBlob
from .sessions import SessionStore


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str = ""):
        self.status = status
        self.code = code
        self.message = message or code


class CreateUserBody(BaseModel):
    handle: str
    display_name: str = ""


class LoginBody(BaseModel):
    handle: str


class CreatePostBody(BaseModel):
    body: str = ""
    attachment: Optional[str] = None
    kind: str = "original"
    parent: Optional[str] = None
    quoted: Optional[str] = None
    suggested: list = Field(default_factory=list)
    blocked: list = Field(default_factory=list)


class BurstBody(BaseModel):
    channels: list


class CreateChannelBody(BaseModel):
    name: str
    description: str = ""
    threshold_override: Optional[int] = None


class InviteBody(BaseModel):
    invitee: str


class BlockBody(BaseModel):
    channel: str


def feed_entry_dict(entry: FeedEntry, engine) -> dict:
    post = engine.posts[entry.post]
    author = engine.users[post.author]
    return {
        "post_id": post.id,
        "author": {"id": author.id, "handle": author.handle, "display_name": author.display_name},
        "body": post.body,
        "attachment": post.attachment,
        "kind": post.kind,
        "parent": post.parent,
        "quoted": post.quoted,
        "created_at": post.created_at,
        "channel_tags": sorted(
            engine.channels[c].name for c in entry.channel_tags
        ),
        "team_banner": (
            {"owner": entry.team_banner, "handle": engine.users[entry.team_banner].handle}
            if entry.team_banner
            else None
        ),
        "burst_progress": [
            {
                "channel": o.channel,
                "name": o.name,
                "votes": o.votes,
                "threshold": o.threshold,
                "suggested": o.suggested,
            }
            for o in entry.burst_progress
        ],
        "replies": [feed_entry_dict(r, engine) for r in entry.replies],
    }


def create_app(node: Node, config: Optional[AppConfig] = None, webui_dir: Optional[str] = None) -> FastAPI:
    config = config or AppConfig()
    app = FastAPI(title="burstd", version="1.0")
    sessions = SessionStore(ttl_ms=config.session_ttl_ms)
    idempotency: dict = {}
    idempotency_lock = threading.Lock()

    @app.exception_handler(errors.DomainError)
    def _domain_error(_req: Request, exc: errors.DomainError):
        return JSONResponse(status_code=422, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(ApiError)
    def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    def current_user(authorization: Optional[str] = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "unauthenticated", "missing bearer token")
        session = sessions.resolve(authorization.removeprefix("Bearer "))
        if session is None:
            raise ApiError(401, "unauthenticated", "invalid or expired token")
        return session.user_id

    def resolve_user(ref: str) -> str:
        """Accept either a user id or a handle."""
        if ref in node.engine.users:
            return ref
        user = node.engine.user_by_handle(ref)
        if user is None:
            raise errors.UnknownUser(f"no such user: {ref}")
        return user.id

    def resolve_channel(ref: str) -> str:
        if ref in node.engine.channels:
            return ref
        channel = node.engine.channel_by_name(ref) or node.engine.channel_by_name("#" + ref)
        if channel is None:
            raise errors.UnknownChannel(f"no such channel: {ref}")
        return channel.id

    def idempotent(key: Optional[str], user_id: str, fn):
        if key is None:
            return fn()
        cache_key = (user_id, key)
        with idempotency_lock:
            if cache_key in idempotency:
                return idempotency[cache_key]
        result = fn()
        with idempotency_lock:
            idempotency[cache_key] = result
        return result

    # -- accounts ------------------------------------------------------

    @app.post("/v1/users", status_code=201)
    def create_user(body: CreateUserBody):
        user_id = node.execute(lambda e: e.create_user(body.handle, body.display_name))
        return {"user_id": user_id, "handle": body.handle}

    @app.post("/v1/sessions", status_code=201)
    def login(body: LoginBody):
        user = node.read(lambda e: e.user_by_handle(body.handle))
        if user is None:
            raise ApiError(401, "unknown_handle", "no account with that handle")
        session = sessions.create(user.id)
        return {"token": session.token, "user_id": user.id, "expires_at": session.expires_at}

    @app.get("/v1/users/me")
    def me(user_id: str = Depends(current_user)):
        def view(e):
            u = e.users[user_id]
            return {
                "id": u.id,
                "handle": u.handle,
                "display_name": u.display_name,
                "team_member_ids": sorted(u.team_member_ids),
                "pending_team_invites": sorted(u.pending_team_invites),
                "joined_channels": sorted(u.joined_channels),
                "invited_by": sorted(
                    o.id for o in e.users.values() if user_id in o.pending_team_invites
                ),
                "teams_joined": sorted(
                    o.id for o in e.users.values() if user_id in o.team_member_ids
                ),
                "created_at": u.created_at,
            }

        return node.read(view)

    # -- posts ---------------------------------------------------------

    @app.post("/v1/posts", status_code=201)
    def create_post(
        body: CreatePostBody,
        user_id: str = Depends(current_user),
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            if config.onboarding_enabled:
                user = node.read(lambda e: e.users[user_id])
                if (
                    len(user.team_member_ids) < config.onboarding_min_team
                    or len(user.joined_channels) < config.onboarding_min_channels
                ):
                    raise ApiError(
                        409,
                        "onboarding_incomplete",
                        f"need at least {config.onboarding_min_team} team members and "
                        f"{config.onboarding_min_channels} joined channels before posting",
                    )
            suggested = [resolve_channel(c) for c in body.suggested]
            blocked = {resolve_channel(c) for c in body.blocked}
            post_id = node.execute(
                lambda e: e.create_post(
                    user_id,
                    body.body,
                    attachment=body.attachment,
                    kind=body.kind,
                    parent=body.parent,
                    quoted=body.quoted,
                    suggested=suggested,
                    blocked=blocked,
                )
            )
            return {"post_id": post_id}

        return idempotent(idempotency_key, user_id, run)

    @app.get("/v1/posts/{post_id}")
    def get_post(post_id: str, user_id: str = Depends(current_user)):
        def view(e):
            if not e.can_view(user_id, post_id):
                raise errors.NotVisible("post not visible")
            p = e.posts[post_id]
            author = e.users[p.author]
            state = e.burst_states[post_id]
            out = {
                "post_id": p.id,
                "author": {"id": author.id, "handle": author.handle, "display_name": author.display_name},
                "body": p.body,
                "attachment": p.attachment,
                "kind": p.kind,
                "parent": p.parent,
                "quoted": p.quoted,
                "suggested_channels": list(p.suggested_channels),
                "burst_into": sorted(state.burst_into),
                "created_at": p.created_at,
                "deleted": p.deleted,
            }
            if user_id == p.author:
                out["blocked_channels"] = sorted(p.blocked_channels)
                out["retracted_from"] = sorted(state.retracted_from)
            return out

        return node.read(view)

    @app.delete("/v1/posts/{post_id}")
    def delete_post(post_id: str, user_id: str = Depends(current_user)):
        node.execute(lambda e: e.delete_post(user_id, post_id))
        return {"deleted": True}

    @app.get("/v1/posts/{post_id}/burst-options")
    def burst_options(post_id: str, user_id: str = Depends(current_user)):
        options = node.read(lambda e: e.burst_options(user_id, post_id))
        return {
            "options": [
                {
                    "channel": o.channel,
                    "name": o.name,
                    "votes": o.votes,
                    "threshold": o.threshold,
                    "suggested": o.suggested,
                }
                for o in options
            ]
        }

    @app.post("/v1/posts/{post_id}/bursts")
    def cast_burst(
        post_id: str,
        body: BurstBody,
        user_id: str = Depends(current_user),
        idempotency_key: Optional[str] = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            channels = [resolve_channel(c) for c in body.channels]
            outcomes = node.execute(lambda e: e.cast_burst(user_id, post_id, channels))
            return {"outcomes": {cid: out.to_dict() for cid, out in outcomes.items()}}

        return idempotent(idempotency_key, user_id, run)

    @app.delete("/v1/posts/{post_id}/channels/{channel_ref}")
    def retract(post_id: str, channel_ref: str, user_id: str = Depends(current_user)):
        channel_id = resolve_channel(channel_ref)
        node.execute(lambda e: e.retract_from_channel(user_id, post_id, channel_id))
        return {"retracted": channel_id}

    @app.post("/v1/posts/{post_id}/blocked-channels")
    def block_retroactive(post_id: str, body: BlockBody, user_id: str = Depends(current_user)):
        channel_id = resolve_channel(body.channel)
        node.execute(lambda e: e.block_channel_retroactive(user_id, post_id, channel_id))
        return {"blocked": channel_id}

    # -- reactions -----------------------------------------------------

    @app.put("/v1/posts/{post_id}/reactions/{emoji}")
    def add_reaction(post_id: str, emoji: str, user_id: str = Depends(current_user)):
        node.execute(lambda e: e.add_reaction(user_id, post_id, emoji))
        return {"ok": True}

    @app.delete("/v1/posts/{post_id}/reactions/{emoji}")
    def remove_reaction(post_id: str, emoji: str, user_id: str = Depends(current_user)):
        node.execute(lambda e: e.remove_reaction(user_id, post_id, emoji))
        return {"ok": True}

    @app.get("/v1/posts/{post_id}/reactions")
    def reactions(post_id: str, user_id: str = Depends(current_user)):
        return {"reactions": node.read(lambda e: e.reactions_for(user_id, post_id))}

    # -- feed ----------------------------------------------------------

    @app.get("/v1/feed")
    def feed(
        channel: Optional[str] = None,
        cursor: Optional[str] = None,
        limit: int = 50,
        user_id: str = Depends(current_user),
    ):
        channel_id = resolve_channel(channel) if channel else None

        def view(e):
            entries, next_cursor = e.assemble_feed(
                user_id, channel_filter=channel_id, cursor=cursor, limit=limit
            )
            return {
                "entries": [feed_entry_dict(entry, e) for entry in entries],
                "next_cursor": next_cursor,
            }

        return node.read(view)

    # -- channels ------------------------------------------------------

    @app.post("/v1/channels", status_code=201)
    def create_channel(body: CreateChannelBody, user_id: str = Depends(current_user)):
        channel_id = node.execute(
            lambda e: e.create_channel(
                user_id, body.name, body.description, threshold_override=body.threshold_override
            )
        )
        return {"channel_id": channel_id, "name": body.name}

    @app.get("/v1/channels")
    def channel_directory(user_id: str = Depends(current_user)):
        def view(e):
            joined = e.users[user_id].joined_channels
            rows = e.channel_directory()
            for row in rows:
                row["joined"] = row["id"] in joined
            return rows

        return {"channels": node.read(view)}

    @app.put("/v1/channels/{channel_ref}/members/me")
    def join_channel(channel_ref: str, user_id: str = Depends(current_user)):
        channel_id = resolve_channel(channel_ref)
        node.execute(lambda e: e.join_channel(user_id, channel_id))
        return {"joined": channel_id}

    @app.delete("/v1/channels/{channel_ref}/members/me")
    def leave_channel(channel_ref: str, user_id: str = Depends(current_user)):
        channel_id = resolve_channel(channel_ref)
        node.execute(lambda e: e.leave_channel(user_id, channel_id))
        return {"left": channel_id}

    # -- team ----------------------------------------------------------

    @app.post("/v1/team/invites", status_code=201)
    def invite(body: InviteBody, user_id: str = Depends(current_user)):
        invitee = resolve_user(body.invitee)
        node.execute(lambda e: e.invite_to_team(user_id, invitee))
        return {"invited": invitee}

    @app.post("/v1/team/invites/{owner_ref}/accept")
    def accept_invite(owner_ref: str, user_id: str = Depends(current_user)):
        owner = resolve_user(owner_ref)
        node.execute(lambda e: e.accept_team_invite(user_id, owner))
        return {"joined_team_of": owner}

    @app.post("/v1/team/invites/{owner_ref}/decline")
    def decline_invite(owner_ref: str, user_id: str = Depends(current_user)):
        owner = resolve_user(owner_ref)
        node.execute(lambda e: e.decline_team_invite(user_id, owner))
        return {"declined": owner}

    @app.delete("/v1/team/members/{member_ref}")
    def remove_member(member_ref: str, user_id: str = Depends(current_user)):
        member = resolve_user(member_ref)
        node.execute(lambda e: e.remove_team_member(user_id, member))
        return {"removed": member}

    @app.delete("/v1/team/memberships/{owner_ref}")
    def leave_team(owner_ref: str, user_id: str = Depends(current_user)):
        owner = resolve_user(owner_ref)
        node.execute(lambda e: e.leave_team(user_id, owner))
        return {"left_team_of": owner}

    # -- blobs ---------------------------------------------------------

    @app.post("/v1/blobs", status_code=201)
    async def put_blob(request: Request, user_id: str = Depends(current_user)):
        data = await request.body()
        try:
            digest = node.blobs.put(data)
        except BlobTooLarge as exc:
            raise ApiError(413, "blob_too_large", str(exc))
        return {"hash": digest}

    @app.get("/v1/blobs/{digest}")
    def get_blob(digest: str, user_id: str = Depends(current_user)):
        try:
            data = node.blobs.get(digest)
        except UnknownBlob:
            raise ApiError(404, "unknown_blob", digest)
        return Response(content=data, media_type="application/octet-stream")

    # -- notifications -------------------------------------------------

    @app.get("/v1/notifications")
    def notifications(since: int = 0, user_id: str = Depends(current_user)):
        return {"notifications": node.notifications_for(user_id, since=since)}

    @app.post("/v1/notifications/{notif_id}/ack")
    def ack(notif_id: str, user_id: str = Depends(current_user)):
        if not node.ack_notification(user_id, notif_id):
            raise ApiError(404, "unknown_notification", notif_id)
        return {"acked": notif_id}

    @app.get("/v1/notifications/stream")
    def stream(user_id: str = Depends(current_user)):
        q = node.subscribe(user_id)

        def gen():
            try:
                while True:
                    try:
                        notif = q.get(timeout=5)
                    except queue.Empty:
                        yield "\n"  # keepalive
                        continue
                    d = notif.to_dict()
                    d["acked"] = notif.id in node.acked
                    yield json.dumps(d, sort_keys=True) + "\n"
            finally:
                node.unsubscribe(q)

        return StreamingResponse(gen(), media_type="application/x-ndjson")

    if webui_dir and Path(webui_dir).is_dir():
        app.mount("/app", StaticFiles(directory=webui_dir, html=True), name="webui")

    return app
