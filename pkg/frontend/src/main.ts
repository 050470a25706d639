// Application shell: login, feed with channel tabs, compose, burst dialog,
// team management, channel directory, notification bell.

import { ApiError, BurstClient } from "./api.js";
import type { AppNotification, BurstOption, PostDetail } from "./api.js";
import {
  burstDialogRows,
  channelTabs,
  feedCards,
  onboardingStatus,
  suggestableChannels,
} from "./state.js";
import {
  escapeHtml,
  renderBurstDialog,
  renderChannelTabs,
  renderDirectory,
  renderFeed,
  renderOnboarding,
} from "./render.js";
import { openNotificationStream, type StreamHandle } from "./stream.js";

const api = new BurstClient("");
let stream: StreamHandle | null = null;
let unread = 0;

const $ = (sel: string) => document.querySelector(sel) as HTMLElement;

function flash(message: string): void {
  const el = $("#flash");
  el.textContent = message;
  el.classList.add("visible");
  setTimeout(() => el.classList.remove("visible"), 4000);
}

async function guard<T>(work: () => Promise<T>): Promise<T | null> {
  try {
    return await work();
  } catch (err) {
    if (err instanceof ApiError) flash(`${err.code}: ${err.message}`);
    else flash(String(err));
    return null;
  }
}

// -- screens ---------------------------------------------------------

async function showFeed(channel: string | null): Promise<void> {
  const [feed, dir, me] = await Promise.all([
    api.feed(channel ? { channel } : {}),
    api.channels(),
    api.me(),
  ]);
  const tabs = channelTabs(dir.channels);
  $("#tabs").innerHTML = renderChannelTabs(tabs, channel);
  $("#main").innerHTML =
    renderOnboarding(onboardingStatus(me)) + renderFeed(feedCards(feed.entries));
}

async function showDirectory(): Promise<void> {
  const dir = await api.channels();
  $("#main").innerHTML = renderDirectory(channelTabs(dir.channels));
}

async function showTeam(): Promise<void> {
  const me = await api.me();
  const member = (id: string) =>
    `<li>${escapeHtml(id)} <button data-action="remove-member" data-member="${escapeHtml(id)}">remove</button></li>`;
  const invite = (id: string) =>
    `<li>${escapeHtml(id)}
       <button data-action="accept-invite" data-owner="${escapeHtml(id)}">accept</button>
       <button data-action="decline-invite" data-owner="${escapeHtml(id)}">decline</button></li>`;
  $("#main").innerHTML = `
    <h2>Your team (${me.team_member_ids.length}/50)</h2>
    <ul>${me.team_member_ids.map(member).join("")}</ul>
    <form id="invite-form">
      <input name="invitee" placeholder="handle to invite" required>
      <button>Invite</button>
    </form>
    <h2>Invitations to you</h2>
    <ul>${me.invited_by.map(invite).join("") || "<li>none</li>"}</ul>`;
}

async function showNotifications(): Promise<void> {
  const { notifications } = await api.notifications();
  unread = 0;
  updateBell();
  const row = (n: AppNotification) => `
    <li class="${n.acked ? "acked" : "fresh"}">
      <b>${escapeHtml(n.kind)}</b>
      ${n.post ? `<a href="#post/${escapeHtml(String(n.post))}">view post</a>` : ""}
      ${n.acked ? "" : `<button data-action="ack" data-id="${escapeHtml(n.id)}">dismiss</button>`}
    </li>`;
  $("#main").innerHTML = `<ul class="notifications">${notifications.map(row).join("")}</ul>`;
}

async function showCompose(): Promise<void> {
  const dir = await api.channels();
  const joined = suggestableChannels(dir.channels);
  const picker = (cls: string) =>
    joined
      .map(
        (name) =>
          `<label><input type="checkbox" class="${cls}" value="${escapeHtml(name)}"> ${escapeHtml(name)}</label>`,
      )
      .join("");
  $("#main").innerHTML = `
    <form id="compose-form">
      <textarea name="body" maxlength="2000" placeholder="What should your team review?" required></textarea>
      <fieldset><legend>Suggest channels (yours only)</legend>${picker("suggest")}</fieldset>
      <fieldset><legend>Never allow these channels</legend>${picker("block")}</fieldset>
      <button>Post to your team</button>
    </form>`;
}

async function openBurstDialog(postId: string): Promise<void> {
  const [options, detail] = await Promise.all([
    api.burstOptions(postId),
    api.getPost(postId).catch(() => null as PostDetail | null),
  ]);
  const rows = burstDialogRows(options.options as BurstOption[], detail?.blocked_channels ?? []);
  const overlay = $("#overlay");
  overlay.innerHTML = renderBurstDialog(rows);
  overlay.classList.add("visible");
  overlay.dataset.post = postId;
}

async function submitBurst(): Promise<void> {
  const overlay = $("#overlay");
  const postId = overlay.dataset.post!;
  const picked = Array.from(
    overlay.querySelectorAll<HTMLInputElement>("input[data-channel]:checked"),
  ).map((el) => el.dataset.channel!);
  if (!picked.length) return;
  // never optimistic: re-render from the server's outcome
  const result = await guard(() => api.castBurst(postId, picked));
  if (!result) return;
  const summary = Object.values(result.outcomes)
    .map((o) => (o.status === "rejected" ? `rejected (${o.reason})` : `${o.status} ${o.votes}/${o.threshold}`))
    .join(", ");
  flash(`Burst: ${summary}`);
  overlay.classList.remove("visible");
  void route();
}

// -- router and event wiring ----------------------------------------

async function route(): Promise<void> {
  if (!api.token) {
    $("#main").innerHTML = `
      <form id="login-form">
        <input name="handle" placeholder="your handle" required pattern="[a-z0-9_-]{1,32}">
        <button>Sign in</button>
        <button type="button" data-action="register">Create account</button>
      </form>`;
    return;
  }
  const hash = location.hash.slice(1) || "feed";
  await guard(async () => {
    if (hash === "feed") await showFeed(null);
    else if (hash.startsWith("channel/")) await showFeed("#" + hash.slice("channel/".length));
    else if (hash === "directory") await showDirectory();
    else if (hash === "team") await showTeam();
    else if (hash === "notifications") await showNotifications();
    else if (hash === "compose") await showCompose();
    else if (hash.startsWith("post/")) await openBurstDialog(hash.slice("post/".length));
    else await showFeed(null);
  });
}

function updateBell(): void {
  $("#bell").textContent = unread ? `notifications (${unread})` : "notifications";
}

function startStream(): void {
  stream?.stop();
  stream = openNotificationStream("", api.token!, () => {
    unread += 1;
    updateBell();
  });
}

document.addEventListener("submit", (ev) => {
  const form = ev.target as HTMLFormElement;
  ev.preventDefault();
  const data = new FormData(form);
  if (form.id === "login-form") {
    void guard(() => api.login(String(data.get("handle")))).then((ok) => {
      if (ok) {
        startStream();
        void route();
      }
    });
  } else if (form.id === "invite-form") {
    void guard(() => api.invite(String(data.get("invitee")))).then(() => route());
  } else if (form.id === "compose-form") {
    const pick = (cls: string) =>
      Array.from(form.querySelectorAll<HTMLInputElement>(`input.${cls}:checked`)).map(
        (el) => el.value,
      );
    void guard(() =>
      api.createPost({
        body: String(data.get("body")),
        suggested: pick("suggest"),
        blocked: pick("block"),
      }),
    ).then((ok) => {
      if (ok) {
        flash("Posted to your team for review.");
        location.hash = "#feed";
      }
    });
  }
});

document.addEventListener("click", (ev) => {
  const el = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!el) return;
  const action = el.dataset.action;
  if (action === "register") {
    const handle = (
      document.querySelector('#login-form input[name="handle"]') as HTMLInputElement
    ).value;
    void guard(async () => {
      await api.createUser(handle);
      await api.login(handle);
    }).then(() => {
      startStream();
      void route();
    });
  } else if (action === "open-burst") void openBurstDialog(el.dataset.post!);
  else if (action === "submit-burst") void submitBurst();
  else if (action === "close-dialog") $("#overlay").classList.remove("visible");
  else if (action === "join-channel")
    void guard(() => api.joinChannel(el.dataset.channel!)).then(() => route());
  else if (action === "leave-channel")
    void guard(() => api.leaveChannel(el.dataset.channel!)).then(() => route());
  else if (action === "accept-invite")
    void guard(() => api.acceptInvite(el.dataset.owner!)).then(() => route());
  else if (action === "decline-invite")
    void guard(() => api.declineInvite(el.dataset.owner!)).then(() => route());
  else if (action === "remove-member")
    void guard(() => api.removeTeamMember(el.dataset.member!)).then(() => route());
  else if (action === "ack") void guard(() => api.ack(el.dataset.id!)).then(() => route());
  else if (action === "react")
    void guard(() => api.react(el.dataset.post!, "\u{1F44D}")).then(() => route());
});

window.addEventListener("hashchange", () => void route());
void route();
