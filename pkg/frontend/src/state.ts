// Pure view-model layer: everything here is a plain function from API data
// to render-ready structures, so it can be tested without a DOM or a server.

import type { BurstOption, ChannelRow, FeedEntry, Me, PostDetail } from "./api.js";

export interface DialogRow {
  channelId: string;
  name: string;
  /** "k/t" progress, e.g. "2/3" when two of three required votes exist. */
  label: string;
  suggested: boolean;
  selected: boolean;
}

/**
 * Rows for the burst dialog. The server already excludes blocked and
 * already-burst channels from burst-options; the extra filter makes the
 * "blocked channels are never rendered" guarantee local too, so a future
 * API regression cannot leak them into the DOM.
 */
export function burstDialogRows(
  options: BurstOption[],
  blocked: Iterable<string> = [],
): DialogRow[] {
  const banned = new Set(blocked);
  return options
    .filter((o) => !banned.has(o.channel) && !banned.has(o.name))
    .map((o) => ({
      channelId: o.channel,
      name: o.name,
      label: `${o.votes}/${o.threshold}`,
      suggested: o.suggested,
      selected: false,
    }));
}

export interface FeedCard {
  postId: string;
  authorHandle: string;
  authorName: string;
  body: string;
  tags: string[];
  teamBanner: string | null; // owner handle when this is a team-review card
  progress: DialogRow[];
  replies: FeedCard[];
  createdAt: number;
}

export function toFeedCard(entry: FeedEntry): FeedCard {
  return {
    postId: entry.post_id,
    authorHandle: entry.author.handle,
    authorName: entry.author.display_name || entry.author.handle,
    body: entry.body,
    tags: entry.channel_tags,
    teamBanner: entry.team_banner ? entry.team_banner.handle : null,
    progress: burstDialogRows(entry.burst_progress),
    replies: entry.replies.map(toFeedCard),
    createdAt: entry.created_at,
  };
}

/** One card per post, whatever the server sent and however many tags. */
export function feedCards(entries: FeedEntry[]): FeedCard[] {
  const seen = new Set<string>();
  const out: FeedCard[] = [];
  const dedupe = (card: FeedCard): FeedCard => ({
    ...card,
    replies: card.replies.filter((r) => !seen.has(r.postId) && (seen.add(r.postId), true)).map(dedupe),
  });
  for (const entry of entries) {
    if (seen.has(entry.post_id)) continue;
    seen.add(entry.post_id);
    out.push(dedupe(toFeedCard(entry)));
  }
  return out;
}

export interface ChannelTab {
  name: string;
  joined: boolean;
  memberCount: number;
  threshold: number;
}

export function channelTabs(rows: ChannelRow[]): ChannelTab[] {
  return rows.map((c) => ({
    name: c.name,
    joined: c.joined,
    memberCount: c.member_count,
    threshold: c.threshold,
  }));
}

/** Channels the composer may suggest: joined ones only. */
export function suggestableChannels(rows: ChannelRow[]): string[] {
  return rows.filter((c) => c.joined).map((c) => c.name);
}

export interface OnboardingStatus {
  done: boolean;
  teamHave: number;
  teamNeed: number;
  channelsHave: number;
  channelsNeed: number;
}

export function onboardingStatus(me: Me, teamNeed = 3, channelsNeed = 3): OnboardingStatus {
  const teamHave = me.team_member_ids.length;
  const channelsHave = me.joined_channels.length;
  return {
    done: teamHave >= teamNeed && channelsHave >= channelsNeed,
    teamHave,
    teamNeed,
    channelsHave,
    channelsNeed,
  };
}

/** Channel names an author's own post can still be retracted from. */
export function retractableChannels(
  detail: PostDetail,
  nameOf: (id: string) => string,
): string[] {
  return detail.burst_into.map(nameOf);
}
