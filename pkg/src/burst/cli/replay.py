"""Deterministic scenario-replay driver.

A script is YAML: an ordered list of steps, each ``{actor, action, args,
expect}``, plus optional ``final`` assertions evaluated against the event
log. The driver talks to the API over HTTP only, fails fast on the first
expectation mismatch, and is deterministic given a script and seed.
"""
from __future__ import annotations

import copy
import json
from typing import Callable, Optional

import httpx


class ReplayMismatch(Exception):
    pass


class TransportError(Exception):
    pass


def _substitute(value, variables: dict):
    if isinstance(value, str):
        for name, val in variables.items():
            value = value.replace("{" + name + "}", str(val))
        return value
    if isinstance(value, list):
        return [_substitute(v, variables) for v in value]
    if isinstance(value, dict):
        return {k: _substitute(v, variables) for k, v in value.items()}
    return value


def expand_steps(steps: list) -> list:
    """Unroll ``repeat: {var, from, to}`` blocks with {var} templating."""
    out = []
    for step in steps:
        repeat = step.get("repeat")
        if not repeat:
            out.append(step)
            continue
        var = repeat["var"]
        for i in range(repeat["from"], repeat["to"] + 1):
            clone = copy.deepcopy({k: v for k, v in step.items() if k != "repeat"})
            out.append(_substitute(clone, {var: i}))
    return out


def _parse_outcome_expect(spec: str) -> dict:
    """Parse "burst", "rejected:blocked", "progress:3/10" into fields."""
    want: dict = {}
    head, _, tail = str(spec).partition(":")
    want["status"] = head
    if tail:
        if head == "rejected":
            want["reason"] = tail
        else:
            votes, _, threshold = tail.partition("/")
            want["votes"] = int(votes)
            want["threshold"] = int(threshold)
    return want


class ReplayDriver:
    def __init__(
        self,
        base_url: str,
        events_fn: Optional[Callable[[], list]] = None,
        verbose: bool = False,
    ):
        self.http = httpx.Client(base_url=base_url, timeout=30.0)
        self.events_fn = events_fn
        self.verbose = verbose
        self.tokens: dict[str, str] = {}
        self.posts: dict[str, str] = {}  # alias -> post id

    def close(self) -> None:
        self.http.close()

    # -- plumbing ------------------------------------------------------

    def _request(self, method, path, actor=None, body=None, params=None):
        headers = {}
        if actor is not None:
            headers["Authorization"] = "Bearer " + self._token(actor)
        try:
            return self.http.request(method, path, json=body, params=params, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc

    def _token(self, handle: str) -> str:
        if handle not in self.tokens:
            resp = self.http.post("/v1/sessions", json={"handle": handle})
            if resp.status_code != 201:
                raise ReplayMismatch(f"login failed for {handle!r}: {resp.text}")
            self.tokens[handle] = resp.json()["token"]
        return self.tokens[handle]

    def _post_id(self, ref: str) -> str:
        if ref in self.posts:
            return self.posts[ref]
        return ref

    # -- script execution ----------------------------------------------

    def run(self, script: dict) -> None:
        steps = expand_steps(script.get("steps", []))
        for index, step in enumerate(steps, 1):
            try:
                self._run_step(step)
            except ReplayMismatch as exc:
                raise ReplayMismatch(
                    f"step {index} ({step.get('action')} as {step.get('actor')}): {exc}"
                ) from None
        final = script.get("final")
        if final:
            self._run_final(final)

    def _run_step(self, step: dict) -> None:
        action = step["action"]
        actor = step.get("actor")
        args = step.get("args", {})
        expect = step.get("expect")
        expect_error = step.get("expect_error")
        handler = getattr(self, "_do_" + action, None)
        if handler is None:
            raise ReplayMismatch(f"unknown action {action!r}")
        resp = handler(actor, args)
        if resp is None:
            return
        if expect_error is not None:
            if resp.status_code < 400:
                raise ReplayMismatch(
                    f"expected error {expect_error!r}, got {resp.status_code}: {resp.text}"
                )
            code = resp.json().get("code")
            if code != expect_error:
                raise ReplayMismatch(f"expected error {expect_error!r}, got {code!r}")
            return
        if resp.status_code >= 400:
            raise ReplayMismatch(f"unexpected {resp.status_code}: {resp.text}")
        if action == "post" and "save_as" in step:
            self.posts[step["save_as"]] = resp.json()["post_id"]
        if action == "burst" and expect:
            self._check_burst_outcomes(resp.json()["outcomes"], expect)
        if self.verbose:
            print(f"  ok: {action} as {actor}")

    def _check_burst_outcomes(self, outcomes: dict, expect: dict) -> None:
        # outcomes are keyed by channel id; expectations by channel name
        directory = self._request("GET", "/v1/channels", actor=next(iter(self.tokens)))
        names = {c["id"]: c["name"] for c in directory.json()["channels"]}
        by_name = {names[cid]: out for cid, out in outcomes.items()}
        for name, spec in expect.items():
            if name not in by_name:
                raise ReplayMismatch(f"no outcome for channel {name}; got {sorted(by_name)}")
            got = by_name[name]
            want = _parse_outcome_expect(spec)
            for key, val in want.items():
                if got.get(key) != val:
                    raise ReplayMismatch(f"{name}: expected {want}, got {got}")

    # -- actions -------------------------------------------------------

    def _do_create_user(self, actor, args):
        return self._request(
            "POST",
            "/v1/users",
            body={"handle": args["handle"], "display_name": args.get("display_name", "")},
        )

    def _do_create_channel(self, actor, args):
        return self._request(
            "POST",
            "/v1/channels",
            actor=actor,
            body={
                "name": args["name"],
                "description": args.get("description", ""),
                "threshold_override": args.get("threshold_override"),
            },
        )

    def _do_join_channel(self, actor, args):
        return self._request(
            "PUT", f"/v1/channels/{args['channel'].lstrip('#')}/members/me", actor=actor
        )

    def _do_leave_channel(self, actor, args):
        return self._request(
            "DELETE", f"/v1/channels/{args['channel'].lstrip('#')}/members/me", actor=actor
        )

    def _do_invite(self, actor, args):
        return self._request(
            "POST", "/v1/team/invites", actor=actor, body={"invitee": args["invitee"]}
        )

    def _do_accept(self, actor, args):
        return self._request("POST", f"/v1/team/invites/{args['owner']}/accept", actor=actor)

    def _do_decline(self, actor, args):
        return self._request("POST", f"/v1/team/invites/{args['owner']}/decline", actor=actor)

    def _do_remove_member(self, actor, args):
        return self._request("DELETE", f"/v1/team/members/{args['member']}", actor=actor)

    def _do_leave_team(self, actor, args):
        return self._request("DELETE", f"/v1/team/memberships/{args['owner']}", actor=actor)

    def _do_post(self, actor, args):
        return self._request(
            "POST",
            "/v1/posts",
            actor=actor,
            body={
                "body": args.get("body", ""),
                "attachment": args.get("attachment"),
                "kind": args.get("kind", "original"),
                "parent": self._post_id(args["parent"]) if args.get("parent") else None,
                "quoted": self._post_id(args["quoted"]) if args.get("quoted") else None,
                "suggested": args.get("suggested", []),
                "blocked": args.get("blocked", []),
            },
        )

    def _do_burst(self, actor, args):
        return self._request(
            "POST",
            f"/v1/posts/{self._post_id(args['post'])}/bursts",
            actor=actor,
            body={"channels": args["channels"]},
        )

    def _do_retract(self, actor, args):
        return self._request(
            "DELETE",
            f"/v1/posts/{self._post_id(args['post'])}/channels/{args['channel'].lstrip('#')}",
            actor=actor,
        )

    def _do_block(self, actor, args):
        return self._request(
            "POST",
            f"/v1/posts/{self._post_id(args['post'])}/blocked-channels",
            actor=actor,
            body={"channel": args["channel"]},
        )

    def _do_react(self, actor, args):
        return self._request(
            "PUT",
            f"/v1/posts/{self._post_id(args['post'])}/reactions/{args['emoji']}",
            actor=actor,
        )

    def _do_delete(self, actor, args):
        return self._request("DELETE", f"/v1/posts/{self._post_id(args['post'])}", actor=actor)

    # -- assertions ----------------------------------------------------

    def _do_assert_visible(self, actor, args):
        resp = self._request("GET", f"/v1/posts/{self._post_id(args['post'])}", actor=actor)
        visible = resp.status_code == 200
        if visible != bool(args.get("value", True)):
            raise ReplayMismatch(
                f"visibility of {args['post']} for {actor}: expected {args.get('value', True)}, "
                f"got {visible} ({resp.status_code})"
            )
        return None

    def _do_assert_burst_into(self, actor, args):
        resp = self._request("GET", f"/v1/posts/{self._post_id(args['post'])}", actor=actor)
        if resp.status_code != 200:
            raise ReplayMismatch(f"cannot read post: {resp.text}")
        directory = self._request("GET", "/v1/channels", actor=actor)
        names = {c["id"]: c["name"] for c in directory.json()["channels"]}
        got = sorted(names[c] for c in resp.json()["burst_into"])
        want = sorted(args["channels"])
        if got != want:
            raise ReplayMismatch(f"burst_into: expected {want}, got {got}")
        return None

    def _do_assert_feed_contains(self, actor, args):
        params = {"limit": 500}
        if args.get("channel"):
            params["channel"] = args["channel"]
        resp = self._request("GET", "/v1/feed", actor=actor, params=params)
        if resp.status_code != 200:
            raise ReplayMismatch(f"feed read failed: {resp.text}")

        ids = set()

        def collect(entries):
            for e in entries:
                ids.add(e["post_id"])
                collect(e["replies"])

        collect(resp.json()["entries"])
        for alias in args.get("posts", []):
            if self._post_id(alias) not in ids:
                raise ReplayMismatch(f"feed missing post {alias}")
        for alias in args.get("absent", []):
            if self._post_id(alias) in ids:
                raise ReplayMismatch(f"feed unexpectedly contains {alias}")
        return None

    def _do_assert_options(self, actor, args):
        resp = self._request(
            "GET", f"/v1/posts/{self._post_id(args['post'])}/burst-options", actor=actor
        )
        if resp.status_code != 200:
            raise ReplayMismatch(f"burst-options failed: {resp.text}")
        names = [o["name"] for o in resp.json()["options"]]
        for name in args.get("contains", []):
            if name not in names:
                raise ReplayMismatch(f"options missing {name}; got {names}")
        for name in args.get("absent", []):
            if name in names:
                raise ReplayMismatch(f"options unexpectedly include {name}")
        if "order" in args and names != list(args["order"]):
            raise ReplayMismatch(f"option order: expected {args['order']}, got {names}")
        return None

    # -- final assertions over the event log ---------------------------

    def _run_final(self, final: dict) -> None:
        if self.events_fn is None:
            raise ReplayMismatch("final assertions require local event-log access")
        events = self.events_fn()
        if "burst_order" in final:
            spec = final["burst_order"]
            post_id = self._post_id(spec["post"])
            directory = self._request("GET", "/v1/channels", actor=next(iter(self.tokens)))
            names = {c["id"]: c["name"] for c in directory.json()["channels"]}
            bursts = [
                names[e.payload["channel_id"]]
                for e in events
                if e.kind == "PostBurst" and e.payload["post_id"] == post_id
            ]
            if bursts != list(spec["channels"]):
                raise ReplayMismatch(
                    f"burst order: expected {spec['channels']}, got {bursts}"
                )
            dupes = {c for c in bursts if bursts.count(c) > 1}
            if dupes:
                raise ReplayMismatch(f"multiple PostBurst events for {sorted(dupes)}")


def format_event(event) -> str:
    payload = json.dumps(event.payload, sort_keys=True)
    return f"{event.seq:>8}  {event.at}  {event.kind:<28} {payload}"
