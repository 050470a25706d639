// Interpreter that drives a replay script through the UI's own client and
// view models, so a scripted run exercises exactly what the browser would.
import { readFileSync } from "node:fs";

import { load } from "js-yaml";

import { BurstClient, type BurstOutcome } from "../src/api.js";
import { burstDialogRows, feedCards } from "../src/state.js";

interface Step {
  actor?: string;
  action: string;
  args?: Record<string, any>;
  expect?: Record<string, string>;
  save_as?: string;
  repeat?: { var: string; from: number; to: number };
}

interface Script {
  name?: string;
  config?: Record<string, string>;
  steps: Step[];
  final?: any;
}

export function loadScript(path: string): Script {
  return load(readFileSync(path, "utf8")) as Script;
}

function substitute(value: any, vars: Record<string, number>): any {
  if (typeof value === "string") {
    let out = value;
    for (const [k, v] of Object.entries(vars)) out = out.replaceAll(`{${k}}`, String(v));
    return out;
  }
  if (Array.isArray(value)) return value.map((v) => substitute(v, vars));
  if (value && typeof value === "object")
    return Object.fromEntries(Object.entries(value).map(([k, v]) => [k, substitute(v, vars)]));
  return value;
}

export function expandSteps(steps: Step[]): Step[] {
  const out: Step[] = [];
  for (const step of steps) {
    if (!step.repeat) {
      out.push(step);
      continue;
    }
    const { var: name, from, to } = step.repeat;
    for (let i = from; i <= to; i++) {
      const { repeat: _repeat, ...rest } = step;
      out.push(substitute(rest, { [name]: i }) as Step);
    }
  }
  return out;
}

function parseExpect(spec: string): Partial<BurstOutcome> {
  const [status, tail] = spec.split(/:(.*)/s);
  const want: Partial<BurstOutcome> = { status: status as BurstOutcome["status"] };
  if (tail) {
    if (status === "rejected") want.reason = tail;
    else {
      const [votes, threshold] = tail.split("/");
      want.votes = Number(votes);
      want.threshold = Number(threshold);
    }
  }
  return want;
}

export class ScriptRunner {
  private clients = new Map<string, BurstClient>();
  private posts = new Map<string, string>();

  constructor(private baseUrl: string) {}

  private async as(handle: string): Promise<BurstClient> {
    let client = this.clients.get(handle);
    if (!client) {
      client = new BurstClient(this.baseUrl);
      await client.login(handle);
      this.clients.set(handle, client);
    }
    return client;
  }

  private postId(ref: string): string {
    return this.posts.get(ref) ?? ref;
  }

  private async channelNames(client: BurstClient): Promise<Map<string, string>> {
    const { channels } = await client.channels();
    return new Map(channels.map((c) => [c.id, c.name]));
  }

  async run(script: Script): Promise<void> {
    for (const step of expandSteps(script.steps)) {
      await this.runStep(step);
    }
  }

  private async runStep(step: Step): Promise<void> {
    const args = step.args ?? {};
    const actor = step.actor!;
    switch (step.action) {
      case "create_user": {
        const anon = new BurstClient(this.baseUrl);
        await anon.createUser(args.handle, args.display_name ?? "");
        return;
      }
      case "create_channel":
        await (await this.as(actor)).createChannel(
          args.name,
          args.description ?? "",
          args.threshold_override ?? null,
        );
        return;
      case "join_channel":
        await (await this.as(actor)).joinChannel(args.channel);
        return;
      case "leave_channel":
        await (await this.as(actor)).leaveChannel(args.channel);
        return;
      case "invite":
        await (await this.as(actor)).invite(args.invitee);
        return;
      case "accept":
        await (await this.as(actor)).acceptInvite(args.owner);
        return;
      case "decline":
        await (await this.as(actor)).declineInvite(args.owner);
        return;
      case "post": {
        const out = await (await this.as(actor)).createPost({
          body: args.body ?? "",
          suggested: args.suggested ?? [],
          blocked: args.blocked ?? [],
          parent: args.parent ? this.postId(args.parent) : undefined,
        });
        if (step.save_as) this.posts.set(step.save_as, out.post_id);
        return;
      }
      case "burst": {
        const client = await this.as(actor);
        const { outcomes } = await client.castBurst(this.postId(args.post), args.channels);
        if (step.expect) {
          const names = await this.channelNames(client);
          const byName = new Map(
            Object.entries(outcomes).map(([cid, o]) => [names.get(cid)!, o]),
          );
          for (const [name, spec] of Object.entries(step.expect)) {
            const got = byName.get(name);
            if (!got) throw new Error(`${name}: no outcome (got ${[...byName.keys()]})`);
            for (const [key, val] of Object.entries(parseExpect(spec))) {
              if ((got as any)[key] !== val)
                throw new Error(`${name}: expected ${spec}, got ${JSON.stringify(got)}`);
            }
          }
        }
        return;
      }
      case "assert_visible": {
        const client = await this.as(actor);
        let visible = true;
        try {
          await client.getPost(this.postId(args.post));
        } catch {
          visible = false;
        }
        if (visible !== (args.value ?? true))
          throw new Error(`visibility of ${args.post} for ${actor}: got ${visible}`);
        return;
      }
      case "assert_options": {
        // exactly what the burst dialog would show, via the dialog model
        const client = await this.as(actor);
        const { options } = await client.burstOptions(this.postId(args.post));
        const names = burstDialogRows(options).map((r) => r.name);
        if (args.order && JSON.stringify(names) !== JSON.stringify(args.order))
          throw new Error(`dialog order: expected ${args.order}, got ${names}`);
        return;
      }
      case "assert_feed_contains": {
        const client = await this.as(actor);
        const feed = await client.feed({ channel: args.channel, limit: 500 });
        const ids = new Set<string>();
        const walk = (cards: ReturnType<typeof feedCards>) =>
          cards.forEach((c) => {
            ids.add(c.postId);
            walk(c.replies);
          });
        walk(feedCards(feed.entries));
        for (const alias of args.posts ?? [])
          if (!ids.has(this.postId(alias))) throw new Error(`feed missing ${alias}`);
        for (const alias of args.absent ?? [])
          if (ids.has(this.postId(alias))) throw new Error(`feed has ${alias}`);
        return;
      }
      case "assert_burst_into": {
        const client = await this.as(actor);
        const detail = await client.getPost(this.postId(args.post));
        const names = await this.channelNames(client);
        const got = detail.burst_into.map((c) => names.get(c)!).sort();
        const want = [...args.channels].sort();
        if (JSON.stringify(got) !== JSON.stringify(want))
          throw new Error(`burst_into: expected ${want}, got ${got}`);
        return;
      }
      default:
        throw new Error(`unknown action ${step.action}`);
    }
  }
}
