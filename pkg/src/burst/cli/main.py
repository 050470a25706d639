"""burstctl: operator and scripting client.

Most subcommands open the data directory directly (single-writer; do not
point them at a store a live server has open). ``replay`` instead drives a
script over HTTP, either against --url or against a private embedded server
with a deterministic clock.

Exit codes: 0 success, 2 expectation mismatch, 3 transport error.
"""
from __future__ import annotations

import sys
import tempfile
from pathlib import Path

import click
import yaml

from .. import errors
from ..api.app import create_app
from ..api.serve import EmbeddedServer
from ..config import AppConfig, load_config, parse_config_text
from ..node import Node
from ..store.eventlog import EventLog
from .replay import ReplayDriver, ReplayMismatch, TransportError, format_event

LOGICAL_EPOCH_MS = 1_700_000_000_000


def make_logical_clock(seed: int = 0):
    """Strictly increasing millisecond clock; deterministic per seed."""
    state = {"n": 0}

    def clock() -> int:
        state["n"] += 1
        return LOGICAL_EPOCH_MS + seed * 1_000_000 + state["n"]

    return clock


def open_node(config: AppConfig, data_dir=None, clock=None) -> Node:
    return Node(data_dir or config.data_dir, config=config.engine_config(), clock=clock)


@click.group()
@click.option("--config", "config_path", default=None, help="config file (or BURSTD_CONFIG)")
@click.pass_context
def cli(ctx, config_path):
    ctx.obj = load_config(config_path)


@cli.command()
@click.option("--admin-handle", default="admin")
@click.pass_obj
def init(config: AppConfig, admin_handle):
    """Create the data dir, the #everyone channel, and the admin user."""
    node = open_node(config)
    if node.engine.seq > 0:
        click.echo(f"data dir {config.data_dir} already initialized (seq {node.engine.seq})")
        node.close()
        return
    admin_id, everyone_id = node.execute(lambda e: e.bootstrap(admin_handle))
    node.close()
    click.echo(f"initialized {config.data_dir}: admin={admin_id} #everyone={everyone_id}")


@cli.command()
@click.option("--webui-dir", default=None, help="static assets to serve under /app/")
@click.option(
    "--clock-seed",
    type=int,
    default=None,
    help="use the deterministic logical clock (scripted testing only)",
)
@click.pass_obj
def serve(config: AppConfig, webui_dir, clock_seed):
    """Run the HTTP API on listen_addr from the config."""
    import uvicorn

    clock = make_logical_clock(clock_seed) if clock_seed is not None else None
    node = open_node(config, clock=clock)
    if node.engine.seq == 0:
        node.execute(lambda e: e.bootstrap())
    app = create_app(node, config, webui_dir=webui_dir)
    host, _, port = config.listen_addr.partition(":")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400))
    finally:
        node.close()


@cli.group()
def user():
    """User administration."""


@user.command("create")
@click.argument("handle")
@click.option("--display-name", default="")
@click.pass_obj
def user_create(config: AppConfig, handle, display_name):
    node = open_node(config)
    try:
        user_id = node.execute(lambda e: e.create_user(handle, display_name))
        click.echo(f"{user_id} {handle}")
    finally:
        node.close()


@user.command("list")
@click.pass_obj
def user_list(config: AppConfig):
    node = open_node(config)
    for u in sorted(node.engine.users.values(), key=lambda u: u.id):
        click.echo(
            f"{u.id:<8} @{u.handle:<20} team={len(u.team_member_ids)} "
            f"channels={len(u.joined_channels)}"
        )
    node.close()


@cli.group()
def channel():
    """Channel administration."""


@channel.command("create")
@click.argument("name")
@click.option("--as", "as_handle", default="admin")
@click.option("--description", default="")
@click.option("--threshold-override", type=int, default=None)
@click.pass_obj
def channel_create(config: AppConfig, name, as_handle, description, threshold_override):
    node = open_node(config)
    try:
        creator = node.engine.user_by_handle(as_handle)
        if creator is None:
            raise errors.UnknownUser(as_handle)
        channel_id = node.execute(
            lambda e: e.create_channel(creator.id, name, description, threshold_override)
        )
        click.echo(f"{channel_id} {name}")
    finally:
        node.close()


@channel.command("list")
@click.pass_obj
def channel_list(config: AppConfig):
    node = open_node(config)
    for row in node.engine.channel_directory():
        click.echo(
            f"{row['id']:<8} {row['name']:<24} members={row['member_count']:<5} "
            f"threshold={row['threshold']}"
        )
    node.close()


@channel.command("threshold")
@click.argument("name")
@click.pass_obj
def channel_threshold(config: AppConfig, name):
    """Print the live computed threshold for a channel."""
    node = open_node(config)
    try:
        chan = node.engine.channel_by_name(name) or node.engine.channel_by_name("#" + name)
        if chan is None:
            raise errors.UnknownChannel(name)
        click.echo(node.engine.threshold_for(chan.id))
    finally:
        node.close()


@cli.command()
@click.option("--as", "as_handle", required=True)
@click.option("--body", required=True)
@click.option("--suggest", default="", help="comma-separated channel names")
@click.option("--block", default="", help="comma-separated channel names")
@click.pass_obj
def post(config: AppConfig, as_handle, body, suggest, block):
    """Create a post directly in the store (bypasses the onboarding gate)."""
    node = open_node(config)
    try:
        author = node.engine.user_by_handle(as_handle)
        if author is None:
            raise errors.UnknownUser(as_handle)

        def to_ids(csv):
            ids = []
            for name in filter(None, (s.strip() for s in csv.split(","))):
                chan = node.engine.channel_by_name(name) or node.engine.channel_by_name("#" + name)
                if chan is None:
                    raise errors.UnknownChannel(name)
                ids.append(chan.id)
            return ids

        post_id = node.execute(
            lambda e: e.create_post(
                author.id, body, suggested=to_ids(suggest), blocked=set(to_ids(block))
            )
        )
        click.echo(post_id)
    finally:
        node.close()


@cli.command()
@click.option("--as", "as_handle", required=True)
@click.option("--post", "post_id", required=True)
@click.option("--channels", required=True, help="comma-separated channel names")
@click.pass_obj
def burst(config: AppConfig, as_handle, post_id, channels):
    """Cast burst votes on a post."""
    node = open_node(config)
    try:
        voter = node.engine.user_by_handle(as_handle)
        if voter is None:
            raise errors.UnknownUser(as_handle)
        ids = []
        for name in filter(None, (s.strip() for s in channels.split(","))):
            chan = node.engine.channel_by_name(name) or node.engine.channel_by_name("#" + name)
            if chan is None:
                raise errors.UnknownChannel(name)
            ids.append(chan.id)
        outcomes = node.execute(lambda e: e.cast_burst(voter.id, post_id, ids))
        for cid, out in outcomes.items():
            click.echo(f"{node.engine.channels[cid].name}: {out.to_dict()}")
    finally:
        node.close()


@cli.command("dump-log")
@click.option("--from", "from_seq", type=int, default=1)
@click.option("--data-dir", default=None)
@click.pass_obj
def dump_log(config: AppConfig, from_seq, data_dir):
    """Print the event log in a human-readable form."""
    log = EventLog(Path(data_dir or config.data_dir))
    for event in log.replay(from_seq=from_seq):
        click.echo(format_event(event))
    log.close()


@cli.command()
@click.argument("script_path", type=click.Path(exists=True))
@click.option("--url", default=None, help="target a running server instead of self-hosting")
@click.option("--data-dir", default=None, help="data dir for the embedded server (default: temp)")
@click.option("--seed", type=int, default=0)
@click.option("--verbose", is_flag=True)
@click.pass_context
def replay(ctx, script_path, url, data_dir, seed, verbose):
    """Execute a scripted multi-agent scenario against the API."""
    script = yaml.safe_load(Path(script_path).read_text())

    if url is not None:
        driver = ReplayDriver(url, verbose=verbose)
        code = _run_driver(driver, script)
        ctx.exit(code)

    overrides = script.get("config", {})
    config = parse_config_text(
        "\n".join(f"{k} = {v}" for k, v in overrides.items())
    )
    work_dir = data_dir or tempfile.mkdtemp(prefix="burst-replay-")
    node = Node(work_dir, config=config.engine_config(), clock=make_logical_clock(seed))
    if node.engine.seq == 0:
        node.execute(lambda e: e.bootstrap())
    app = create_app(node, config)
    server = EmbeddedServer(app)
    try:
        server.start()
    except Exception as exc:  # pragma: no cover
        click.echo(f"transport error: {exc}", err=True)
        node.close()
        ctx.exit(3)
    driver = ReplayDriver(
        server.base_url,
        events_fn=lambda: list(node.log.replay()),
        verbose=verbose,
    )
    try:
        code = _run_driver(driver, script)
    finally:
        driver.close()
        server.stop()
        node.close()
    if code == 0:
        click.echo(f"replay ok: {script.get('name', script_path)} (log at {work_dir})")
    ctx.exit(code)


def _run_driver(driver: ReplayDriver, script: dict) -> int:
    try:
        driver.run(script)
        return 0
    except ReplayMismatch as exc:
        click.echo(f"expectation mismatch: {exc}", err=True)
        return 2
    except TransportError as exc:
        click.echo(f"transport error: {exc}", err=True)
        return 3


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except errors.DomainError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
