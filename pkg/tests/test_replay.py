"""Replay determinism and node durability."""
import random

from burst.core.engine import Engine
from burst.node import Node
from worlds import fresh_engine, logical_clock, populate, run_random_commands


def test_fold_of_events_equals_live_state():
    rng = random.Random(1)
    engine, events = fresh_engine()
    populate(rng, engine, 8, 4)
    run_random_commands(rng, engine, 200)
    replayed = Engine.replay(events)
    assert replayed.canonical_bytes() == engine.canonical_bytes()


def test_two_identical_scripts_identical_state():
    def build(seed):
        rng = random.Random(seed)
        engine, events = fresh_engine()
        populate(rng, engine, 6, 3)
        run_random_commands(rng, engine, 150)
        return engine.canonical_bytes()

    assert build(42) == build(42)
    assert build(42) != build(43)


def test_node_persists_and_recovers(tmp_path):
    node = Node(tmp_path, clock=logical_clock())
    node.execute(lambda e: e.bootstrap())
    node.execute(lambda e: e.create_user("ann"))
    live = node.engine.canonical_bytes()
    node.log.close()  # no snapshot: force log-only recovery

    node2 = Node(tmp_path)
    assert node2.engine.canonical_bytes() == live
    node2.close()


def test_node_recovers_from_snapshot_plus_tail(tmp_path):
    node = Node(tmp_path, clock=logical_clock())
    node.execute(lambda e: e.bootstrap())
    node.snapshot()
    node.execute(lambda e: e.create_user("late"))
    live = node.engine.canonical_bytes()
    node.log.close()

    node2 = Node(tmp_path)
    assert node2.engine.canonical_bytes() == live
    assert "late" in [u.handle for u in node2.engine.users.values()]
    node2.close()


def test_snapshots_are_deletable_caches(tmp_path):
    node = Node(tmp_path, clock=logical_clock())
    node.execute(lambda e: e.bootstrap())
    node.execute(lambda e: e.create_user("bee"))
    node.close()  # writes a snapshot
    live = Node(tmp_path).engine.canonical_bytes()
    for snap in (tmp_path / "snapshots").glob("*.snap"):
        snap.unlink()
    assert Node(tmp_path).engine.canonical_bytes() == live


def test_engine_exceptions_do_not_lose_prior_events(tmp_path):
    node = Node(tmp_path, clock=logical_clock())
    node.execute(lambda e: e.bootstrap())
    try:
        node.execute(lambda e: e.create_user("BAD HANDLE"))
    except Exception:
        pass
    node.execute(lambda e: e.create_user("fine"))
    node.log.close()
    node2 = Node(tmp_path)
    assert "fine" in [u.handle for u in node2.engine.users.values()]
    node2.close()
