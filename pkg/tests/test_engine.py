import pytest

from burst import errors
from burst.core.types import EngineConfig, ThresholdPolicy
from worlds import fresh_engine


@pytest.fixture
def world():
    """Engine with author x, team {b, c, d}, outsider z, channel #burst."""
    engine, events = fresh_engine()
    x = engine.create_user("xia")
    b = engine.create_user("bo")
    c = engine.create_user("cam")
    d = engine.create_user("dee")
    z = engine.create_user("zed")
    for member in (b, c, d):
        engine.invite_to_team(x, member)
        engine.accept_team_invite(member, x)
    burst_chan = engine.create_channel(x, "#burst", threshold_override=2)
    for member in (b, c, d, z):
        engine.join_channel(member, burst_chan)
    return engine, events, dict(x=x, b=b, c=c, d=d, z=z, burst=burst_chan)


def test_post_visible_to_author_and_team_only(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "hello", suggested=[ids["burst"]])
    viewers = {u for u in engine.users if engine.can_view(u, post)}
    assert viewers == {ids["x"], ids["b"], ids["c"], ids["d"]}


def test_team_review_notifications_fan_out_to_team(world):
    engine, _, ids = world
    before = len(engine.notifications)
    post = engine.create_post(ids["x"], "hello")
    fresh = engine.notifications[before:]
    assert {n.recipient for n in fresh} == {ids["b"], ids["c"], ids["d"]}
    assert all(n.kind == "TeamReview" and n.subject == post for n in fresh)


def test_suggest_block_overlap_rejected(world):
    engine, _, ids = world
    with pytest.raises(errors.SuggestBlockOverlap):
        engine.create_post(ids["x"], "hi", suggested=[ids["burst"]], blocked={ids["burst"]})


def test_suggesting_unjoined_channel_rejected(world):
    engine, _, ids = world
    other = engine.create_channel(ids["z"], "#zeds-place")
    with pytest.raises(errors.SuggestedChannelNotJoined):
        engine.create_post(ids["x"], "hi", suggested=[other])


def test_reply_to_invisible_post_rejected(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "private")
    assert not engine.can_view(ids["z"], post)
    with pytest.raises(errors.ParentNotVisible):
        engine.create_post(ids["z"], "sneaky reply", kind="reply", parent=post)


def test_body_required_unless_attachment(world):
    engine, _, ids = world
    with pytest.raises(errors.BadPost):
        engine.create_post(ids["x"], "")
    assert engine.create_post(ids["x"], "", attachment="ab" * 32)


def test_two_votes_fire_the_low_threshold_channel(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea", suggested=[ids["burst"]])
    first = engine.cast_burst(ids["b"], post, [ids["burst"]])
    assert first[ids["burst"]].status == "progress"
    assert (first[ids["burst"]].votes, first[ids["burst"]].threshold) == (1, 2)
    second = engine.cast_burst(ids["c"], post, [ids["burst"]])
    assert second[ids["burst"]].status == "burst"
    assert ids["burst"] in engine.burst_states[post].burst_into


def test_burst_makes_post_visible_to_channel_members(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    assert not engine.can_view(ids["z"], post)
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    assert engine.can_view(ids["z"], post)


def test_burst_notifies_author(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    before = len(engine.notifications)
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    fresh = engine.notifications[before:]
    assert any(n.kind == "PostBurst" and n.recipient == ids["x"] for n in fresh)


def test_repeat_vote_is_idempotent(world):
    engine, events, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    n_events = len(events)
    again = engine.cast_burst(ids["b"], post, [ids["burst"]])
    assert again[ids["burst"]].status == "already_voted"
    assert len(events) == n_events
    assert engine.burst_states[post].votes[ids["burst"]] == {ids["b"]}


def test_author_cannot_burst_own_post(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    with pytest.raises(errors.SelfBurst):
        engine.cast_burst(ids["x"], post, [ids["burst"]])


def test_non_member_vote_rejected_per_channel(world):
    engine, _, ids = world
    lonely = engine.create_channel(ids["z"], "#lonely", threshold_override=1)
    post = engine.create_post(ids["x"], "idea")
    out = engine.cast_burst(ids["b"], post, [lonely, ids["burst"]])
    assert out[lonely].status == "rejected" and out[lonely].reason == "not_a_member"
    assert out[ids["burst"]].status == "progress"


def test_blocked_channel_vote_rejected(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea", blocked={ids["burst"]})
    out = engine.cast_burst(ids["b"], post, [ids["burst"]])
    assert out[ids["burst"]].status == "rejected"
    assert out[ids["burst"]].reason == "blocked"


def test_threshold_evaluated_at_vote_time_and_burst_never_revoked(world):
    engine, _, ids = world
    chan = engine.create_channel(ids["x"], "#grow")  # 1 member -> threshold 1
    engine.join_channel(ids["b"], chan)
    post = engine.create_post(ids["x"], "idea")
    out = engine.cast_burst(ids["b"], post, [chan])
    assert out[chan].status == "burst"
    # membership growth raises the threshold but cannot un-burst
    for handle in ("m1", "m2", "m3"):
        member = engine.create_user(handle)
        engine.join_channel(member, chan)
    assert chan in engine.burst_states[post].burst_into


def test_retraction_restores_team_only_visibility(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    assert engine.can_view(ids["z"], post)
    engine.retract_from_channel(ids["x"], post, ids["burst"])
    assert not engine.can_view(ids["z"], post)
    viewers = {u for u in engine.users if engine.can_view(u, post)}
    assert viewers == {ids["x"], ids["b"], ids["c"], ids["d"]}


def test_retract_twice_fails(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    engine.retract_from_channel(ids["x"], post, ids["burst"])
    with pytest.raises(errors.NotBurstThere):
        engine.retract_from_channel(ids["x"], post, ids["burst"])


def test_retracted_channel_is_absorbing(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    engine.retract_from_channel(ids["x"], post, ids["burst"])
    out = engine.cast_burst(ids["d"], post, [ids["burst"]])
    assert out[ids["burst"]].status == "rejected"
    assert out[ids["burst"]].reason == "retracted"
    # votes were discarded, and the channel can never re-burst
    assert ids["burst"] not in engine.burst_states[post].votes
    assert ids["burst"] in engine.burst_states[post].retracted_from


def test_only_author_may_retract(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    with pytest.raises(errors.NotAuthor):
        engine.retract_from_channel(ids["b"], post, ids["burst"])


def test_retroactive_block_discards_pending_votes(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.block_channel_retroactive(ids["x"], post, ids["burst"])
    assert ids["burst"] in engine.posts[post].blocked_channels
    assert ids["burst"] not in engine.burst_states[post].votes
    out = engine.cast_burst(ids["c"], post, [ids["burst"]])
    assert out[ids["burst"]].reason == "blocked"


def test_block_after_burst_requires_retraction_first(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    with pytest.raises(errors.AlreadyBurstUseRetract):
        engine.block_channel_retroactive(ids["x"], post, ids["burst"])
    engine.retract_from_channel(ids["x"], post, ids["burst"])
    engine.block_channel_retroactive(ids["x"], post, ids["burst"])
    assert ids["burst"] in engine.posts[post].blocked_channels


def test_burst_options_order_and_filtering(world):
    engine, _, ids = world
    lol = engine.create_channel(ids["x"], "#lol")
    engine.join_channel(ids["b"], lol)
    alpha = engine.create_channel(ids["x"], "#alpha")
    engine.join_channel(ids["b"], alpha)
    post = engine.create_post(ids["x"], "idea", suggested=[ids["burst"]])
    names = [(o.name, o.suggested) for o in engine.burst_options(ids["b"], post)]
    # suggested first, then alphabetical
    assert names == [("#burst", True), ("#alpha", False), ("#everyone", False), ("#lol", False)]


def test_burst_options_hide_blocked_and_burst_channels(world):
    engine, _, ids = world
    lol = engine.create_channel(ids["x"], "#lol")
    engine.join_channel(ids["b"], lol)
    post = engine.create_post(ids["x"], "idea", blocked={lol})
    options = {o.channel for o in engine.burst_options(ids["b"], post)}
    assert lol not in options
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    options = {o.channel for o in engine.burst_options(ids["b"], post)}
    assert ids["burst"] not in options


def test_burst_options_requires_visibility(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    with pytest.raises(errors.NotVisible):
        engine.burst_options(ids["z"], post)


def test_late_joiner_sees_burst_post(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    engine.cast_burst(ids["b"], post, [ids["burst"]])
    engine.cast_burst(ids["c"], post, [ids["burst"]])
    late = engine.create_user("latecomer")
    assert not engine.can_view(late, post)
    engine.join_channel(late, ids["burst"])
    assert engine.can_view(late, post)


def test_deleted_post_visible_only_to_author(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "oops")
    engine.delete_post(ids["x"], post)
    assert engine.can_view(ids["x"], post)
    assert not engine.can_view(ids["b"], post)


def test_reactions_are_attributed_and_deduped(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    emoji = engine.config.emoji_allowlist[0]
    engine.add_reaction(ids["b"], post, emoji)
    engine.add_reaction(ids["b"], post, emoji)  # no-op
    assert engine.reactions_for(ids["x"], post) == {emoji: ["bo"]}
    engine.remove_reaction(ids["b"], post, emoji)
    assert engine.reactions_for(ids["x"], post) == {}


def test_reaction_emoji_allowlist(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    with pytest.raises(errors.EmojiNotAllowed):
        engine.add_reaction(ids["b"], post, "🦖")


def test_reaction_requires_visibility(world):
    engine, _, ids = world
    post = engine.create_post(ids["x"], "idea")
    with pytest.raises(errors.NotVisible):
        engine.add_reaction(ids["z"], post, engine.config.emoji_allowlist[0])


# -- teams ---------------------------------------------------------------


def test_invite_accept_flow(world):
    engine, _, ids = world
    engine.invite_to_team(ids["x"], ids["z"])
    assert ids["z"] in engine.users[ids["x"]].pending_team_invites
    engine.accept_team_invite(ids["z"], ids["x"])
    assert ids["z"] in engine.users[ids["x"]].team_member_ids
    assert ids["z"] not in engine.users[ids["x"]].pending_team_invites
    post = engine.create_post(ids["x"], "future post")
    assert engine.can_view(ids["z"], post)


def test_accept_without_invite(world):
    engine, _, ids = world
    with pytest.raises(errors.NotInvited):
        engine.accept_team_invite(ids["z"], ids["b"])


def test_self_invite_rejected(world):
    engine, _, ids = world
    with pytest.raises(errors.SelfInvite):
        engine.invite_to_team(ids["x"], ids["x"])


def test_team_cap():
    engine, _ = fresh_engine(
        EngineConfig(policy=ThresholdPolicy(), max_team_size=50)
    )
    owner = engine.create_user("owner")
    for i in range(50):
        engine.invite_to_team(owner, engine.create_user(f"m{i}"))
    extra = engine.create_user("extra")
    with pytest.raises(errors.TeamFull):
        engine.invite_to_team(owner, extra)


def test_decline_and_remove(world):
    engine, _, ids = world
    engine.invite_to_team(ids["b"], ids["z"])
    engine.decline_team_invite(ids["z"], ids["b"])
    assert ids["z"] not in engine.users[ids["b"]].pending_team_invites
    engine.remove_team_member(ids["x"], ids["b"])
    assert ids["b"] not in engine.users[ids["x"]].team_member_ids
    post = engine.create_post(ids["x"], "after removal")
    assert not engine.can_view(ids["b"], post)


def test_leave_team(world):
    engine, _, ids = world
    engine.leave_team(ids["b"], ids["x"])
    assert ids["b"] not in engine.users[ids["x"]].team_member_ids


# -- channels ------------------------------------------------------------


def test_create_channel_auto_joins_creator(world):
    engine, _, ids = world
    chan = engine.create_channel(ids["z"], "#gto")
    assert engine.channels[chan].member_ids == {ids["z"]}
    assert engine.threshold_for(chan) == engine.config.policy.min_threshold


def test_duplicate_and_bad_channel_names(world):
    engine, _, ids = world
    with pytest.raises(errors.DuplicateName):
        engine.create_channel(ids["x"], "#everyone")
    with pytest.raises(errors.BadName):
        engine.create_channel(ids["x"], "no-hash")
    with pytest.raises(errors.BadName):
        engine.create_channel(ids["x"], "#UpperCase")


def test_cannot_leave_everyone(world):
    engine, _, ids = world
    with pytest.raises(errors.CannotLeaveEveryone):
        engine.leave_channel(ids["x"], engine.everyone_id)


def test_join_raises_threshold_monotonically(world):
    engine, _, ids = world
    chan = engine.create_channel(ids["x"], "#grow2")
    before = engine.threshold_for(chan)
    for i in range(30):
        member = engine.create_user(f"joiner{i}")
        engine.join_channel(member, chan)
        after = engine.threshold_for(chan)
        assert after >= before
        before = after


def test_new_users_auto_join_everyone(world):
    engine, _, _ = world
    newcomer = engine.create_user("fresh")
    assert engine.everyone_id in engine.users[newcomer].joined_channels
    assert newcomer in engine.channels[engine.everyone_id].member_ids


def test_handle_validation(world):
    engine, _, _ = world
    with pytest.raises(errors.BadHandle):
        engine.create_user("Bad Handle!")
    with pytest.raises(errors.DuplicateHandle):
        engine.create_user("xia")
