"""Randomized world and command-script generation for property tests."""
from __future__ import annotations

import random

from burst import errors
from burst.core.engine import Engine
from burst.core.types import EngineConfig, ThresholdPolicy


def logical_clock(start: int = 1_700_000_000_000):
    state = {"n": 0}

    def clock() -> int:
        state["n"] += 1
        return start + state["n"]

    return clock


def fresh_engine(config: EngineConfig | None = None) -> tuple:
    """Bootstrapped engine plus the list its events are recorded into."""
    events: list = []
    engine = Engine(config=config, clock=logical_clock(), on_event=events.append)
    engine.bootstrap()
    return engine, events


def random_policy(rng: random.Random) -> ThresholdPolicy:
    ratio = rng.choice([0.02, 0.05, 0.1, 0.25, 0.5])
    mn = rng.randint(1, 3)
    mx = rng.randint(mn, 60)
    everyone_ratio = ratio + rng.choice([0.01, 0.1, 0.3, 0.5])
    if everyone_ratio > 1:
        everyone_ratio = min(1.0, ratio + 0.01)
    return ThresholdPolicy(
        ratio=ratio, min_threshold=mn, max_threshold=mx, everyone_ratio=everyone_ratio
    )


def populate(rng: random.Random, engine: Engine, n_users: int, n_channels: int) -> None:
    """Create users, channels (some with overrides), memberships, and teams."""
    users = [engine.create_user(f"user-{i}") for i in range(n_users)]
    channels = []
    for i in range(n_channels):
        creator = rng.choice(users)
        override = rng.randint(1, 40) if rng.random() < 0.3 else None
        channels.append(
            engine.create_channel(creator, f"#chan-{i}", threshold_override=override)
        )
    for user in users:
        for channel in channels:
            if rng.random() < 0.4:
                try:
                    engine.join_channel(user, channel)
                except errors.DomainError:
                    pass
    for owner in users:
        for invitee in rng.sample(users, min(len(users), rng.randint(0, 4))):
            try:
                engine.invite_to_team(owner, invitee)
                if rng.random() < 0.8:
                    engine.accept_team_invite(invitee, owner)
            except errors.DomainError:
                pass


def run_random_commands(rng: random.Random, engine: Engine, steps: int) -> int:
    """Issue ``steps`` random commands (some intentionally invalid).

    Returns the number of commands the engine accepted.
    """
    accepted = 0
    for _ in range(steps):
        try:
            _random_command(rng, engine)
            accepted += 1
        except errors.DomainError:
            pass
    return accepted


def _random_command(rng: random.Random, engine: Engine) -> None:
    users = list(engine.users)
    channels = list(engine.channels)
    posts = list(engine.posts)
    op = rng.choices(
        ["post", "burst", "join", "leave", "team", "retract", "block", "react", "delete"],
        weights=[3, 8, 2, 1, 2, 1, 1, 1, 0.3],
    )[0]

    if op == "post":
        author = rng.choice(users)
        joined = sorted(engine.users[author].joined_channels)
        suggested = rng.sample(joined, min(len(joined), rng.randint(0, 2)))
        blocked = {
            c
            for c in rng.sample(channels, min(len(channels), rng.randint(0, 2)))
            if c not in suggested
        }
        kind, parent, quoted = "original", None, None
        if posts and rng.random() < 0.3:
            target = rng.choice(posts)
            if rng.random() < 0.7:
                kind, parent = "reply", target
            else:
                kind, quoted = "quote", target
        engine.create_post(
            author,
            f"post body {rng.randint(0, 10 ** 6)}",
            kind=kind,
            parent=parent,
            quoted=quoted,
            suggested=suggested,
            blocked=blocked,
        )
    elif op == "burst" and posts:
        voter = rng.choice(users)
        post = rng.choice(posts)
        pool = sorted(engine.users[voter].joined_channels) + rng.sample(
            channels, min(len(channels), 1)
        )
        picks = rng.sample(pool, min(len(pool), rng.randint(1, 3)))
        engine.cast_burst(voter, post, picks)
    elif op == "join":
        engine.join_channel(rng.choice(users), rng.choice(channels))
    elif op == "leave":
        engine.leave_channel(rng.choice(users), rng.choice(channels))
    elif op == "team":
        owner, other = rng.choice(users), rng.choice(users)
        action = rng.choice(["invite", "accept", "decline", "remove"])
        if action == "invite":
            engine.invite_to_team(owner, other)
        elif action == "accept":
            engine.accept_team_invite(other, owner)
        elif action == "decline":
            engine.decline_team_invite(other, owner)
        else:
            engine.remove_team_member(owner, other)
    elif op == "retract" and posts:
        post = rng.choice(posts)
        state = engine.burst_states[post]
        if state.burst_into:
            engine.retract_from_channel(
                engine.posts[post].author, post, rng.choice(sorted(state.burst_into))
            )
    elif op == "block" and posts:
        post = rng.choice(posts)
        engine.block_channel_retroactive(
            engine.posts[post].author, post, rng.choice(channels)
        )
    elif op == "react" and posts:
        emoji = rng.choice(engine.config.emoji_allowlist)
        engine.add_reaction(rng.choice(users), rng.choice(posts), emoji)
    elif op == "delete" and posts:
        post = rng.choice(posts)
        engine.delete_post(engine.posts[post].author, post)
