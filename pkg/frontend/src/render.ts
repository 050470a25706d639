// HTML string templates. Kept free of document/window so the exact markup
// the user sees can be asserted in node tests.

import type { ChannelTab, DialogRow, FeedCard, OnboardingStatus } from "./state.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBurstDialog(rows: DialogRow[]): string {
  const items = rows
    .map(
      (r) => `
    <label class="burst-row${r.suggested ? " suggested" : ""}">
      <input type="checkbox" data-channel="${escapeHtml(r.channelId)}"${r.selected ? " checked" : ""}>
      <span class="chan">${escapeHtml(r.name)}</span>
      ${r.suggested ? '<span class="pin">suggested</span>' : ""}
      <span class="progress">${r.label}</span>
    </label>`,
    )
    .join("\n");
  return `
  <div class="burst-dialog">
    <h3>Burst this post</h3>
    ${rows.length ? items : '<p class="empty">No channels available.</p>'}
    <button data-action="submit-burst">Burst</button>
    <button data-action="close-dialog">Cancel</button>
  </div>`;
}

export function renderFeedCard(card: FeedCard): string {
  const banner = card.teamBanner
    ? `<div class="team-banner">Team post from @${escapeHtml(card.teamBanner)}&rsquo;s team &mdash; review it?</div>`
    : "";
  const tags = card.tags
    .map((t) => `<a class="tag" href="#channel/${escapeHtml(t.slice(1))}">${escapeHtml(t)}</a>`)
    .join(" ");
  const replies = card.replies.map(renderFeedCard).join("\n");
  return `
  <article class="card${card.teamBanner ? " team" : ""}" data-post="${escapeHtml(card.postId)}">
    ${banner}
    <header><b>${escapeHtml(card.authorName)}</b> <span class="handle">@${escapeHtml(card.authorHandle)}</span></header>
    <p class="body">${escapeHtml(card.body)}</p>
    <footer>
      ${tags}
      <button data-action="open-burst" data-post="${escapeHtml(card.postId)}">burst</button>
      <button data-action="react" data-post="${escapeHtml(card.postId)}">&#128077;</button>
    </footer>
    ${replies ? `<div class="replies">${replies}</div>` : ""}
  </article>`;
}

export function renderFeed(cards: FeedCard[]): string {
  if (!cards.length) return '<p class="empty">Nothing here yet.</p>';
  return cards.map(renderFeedCard).join("\n");
}

export function renderChannelTabs(tabs: ChannelTab[], active: string | null): string {
  const all = `<a class="tab${active ? "" : " active"}" href="#feed">all</a>`;
  const rest = tabs
    .filter((t) => t.joined)
    .map(
      (t) =>
        `<a class="tab${t.name === active ? " active" : ""}" href="#channel/${escapeHtml(t.name.slice(1))}">${escapeHtml(t.name)}</a>`,
    )
    .join("");
  return `<nav class="tabs">${all}${rest}</nav>`;
}

export function renderDirectory(tabs: ChannelTab[]): string {
  const rows = tabs
    .map(
      (t) => `
    <li>
      <span class="chan">${escapeHtml(t.name)}</span>
      <span class="meta">${t.memberCount} members &middot; threshold ${t.threshold}</span>
      <button data-action="${t.joined ? "leave" : "join"}-channel" data-channel="${escapeHtml(t.name)}">
        ${t.joined ? "leave" : "join"}
      </button>
    </li>`,
    )
    .join("\n");
  return `<ul class="directory">${rows}</ul>`;
}

export function renderOnboarding(status: OnboardingStatus): string {
  if (status.done) return "";
  return `
  <div class="onboarding">
    <h3>Before you can post</h3>
    <p>Invite at least ${status.teamNeed} people to your team
       (${status.teamHave}/${status.teamNeed}) and join at least
       ${status.channelsNeed} channels (${status.channelsHave}/${status.channelsNeed}).</p>
  </div>`;
}
