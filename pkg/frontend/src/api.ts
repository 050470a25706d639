// Thin typed client for the server's v1 JSON API. Every screen in the UI
// goes through this module; nothing else touches the network.

export interface Author {
  id: string;
  handle: string;
  display_name: string;
}

export interface BurstOption {
  channel: string;
  name: string;
  votes: number;
  threshold: number;
  suggested: boolean;
}

export interface BurstOutcome {
  status: "progress" | "burst" | "already_voted" | "rejected";
  votes: number;
  threshold: number;
  reason?: string;
}

export interface FeedEntry {
  post_id: string;
  author: Author;
  body: string;
  attachment: string | null;
  kind: string;
  parent: string | null;
  quoted: string | null;
  created_at: number;
  channel_tags: string[];
  team_banner: { owner: string; handle: string } | null;
  burst_progress: BurstOption[];
  replies: FeedEntry[];
}

export interface PostDetail {
  post_id: string;
  author: Author;
  body: string;
  attachment: string | null;
  kind: string;
  parent: string | null;
  quoted: string | null;
  suggested_channels: string[];
  burst_into: string[];
  created_at: number;
  deleted: boolean;
  blocked_channels?: string[];
  retracted_from?: string[];
}

export interface ChannelRow {
  id: string;
  name: string;
  description: string;
  member_count: number;
  threshold: number;
  is_everyone: boolean;
  joined: boolean;
}

export interface Me {
  id: string;
  handle: string;
  display_name: string;
  team_member_ids: string[];
  pending_team_invites: string[];
  joined_channels: string[];
  invited_by: string[];
  teams_joined: string[];
  created_at: number;
}

export interface AppNotification {
  id: string;
  kind: string;
  recipient: string;
  post?: string;
  at: number;
  acked: boolean;
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class BurstClient {
  token: string | null = null;

  constructor(public baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const data = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ApiError(resp.status, data?.code ?? "http_error", data?.message ?? resp.statusText);
    }
    return data as T;
  }

  // accounts
  createUser(handle: string, displayName = "") {
    return this.request<{ user_id: string }>("POST", "/v1/users", {
      handle,
      display_name: displayName,
    });
  }

  async login(handle: string) {
    const out = await this.request<{ token: string; user_id: string }>("POST", "/v1/sessions", {
      handle,
    });
    this.token = out.token;
    return out;
  }

  me() {
    return this.request<Me>("GET", "/v1/users/me");
  }

  // posts
  createPost(body: {
    body: string;
    suggested?: string[];
    blocked?: string[];
    parent?: string;
    quoted?: string;
    attachment?: string;
    kind?: string;
  }) {
    return this.request<{ post_id: string }>("POST", "/v1/posts", body);
  }

  getPost(postId: string) {
    return this.request<PostDetail>("GET", `/v1/posts/${postId}`);
  }

  deletePost(postId: string) {
    return this.request<{ deleted: boolean }>("DELETE", `/v1/posts/${postId}`);
  }

  burstOptions(postId: string) {
    return this.request<{ options: BurstOption[] }>("GET", `/v1/posts/${postId}/burst-options`);
  }

  castBurst(postId: string, channels: string[]) {
    return this.request<{ outcomes: Record<string, BurstOutcome> }>(
      "POST",
      `/v1/posts/${postId}/bursts`,
      { channels },
    );
  }

  retract(postId: string, channel: string) {
    return this.request<{ retracted: string }>(
      "DELETE",
      `/v1/posts/${postId}/channels/${channel.replace(/^#/, "")}`,
    );
  }

  blockChannel(postId: string, channel: string) {
    return this.request<{ blocked: string }>("POST", `/v1/posts/${postId}/blocked-channels`, {
      channel,
    });
  }

  react(postId: string, emoji: string) {
    return this.request<{ ok: boolean }>(
      "PUT",
      `/v1/posts/${postId}/reactions/${encodeURIComponent(emoji)}`,
    );
  }

  unreact(postId: string, emoji: string) {
    return this.request<{ ok: boolean }>(
      "DELETE",
      `/v1/posts/${postId}/reactions/${encodeURIComponent(emoji)}`,
    );
  }

  reactions(postId: string) {
    return this.request<{ reactions: Record<string, string[]> }>(
      "GET",
      `/v1/posts/${postId}/reactions`,
    );
  }

  feed(opts: { channel?: string; cursor?: string; limit?: number } = {}) {
    const params = new URLSearchParams();
    if (opts.channel) params.set("channel", opts.channel);
    if (opts.cursor) params.set("cursor", opts.cursor);
    if (opts.limit) params.set("limit", String(opts.limit));
    const qs = params.toString();
    return this.request<{ entries: FeedEntry[]; next_cursor: string | null }>(
      "GET",
      "/v1/feed" + (qs ? `?${qs}` : ""),
    );
  }

  // channels
  createChannel(name: string, description = "", thresholdOverride: number | null = null) {
    return this.request<{ channel_id: string; name: string }>("POST", "/v1/channels", {
      name,
      description,
      threshold_override: thresholdOverride,
    });
  }

  channels() {
    return this.request<{ channels: ChannelRow[] }>("GET", "/v1/channels");
  }

  joinChannel(channel: string) {
    return this.request<unknown>("PUT", `/v1/channels/${channel.replace(/^#/, "")}/members/me`);
  }

  leaveChannel(channel: string) {
    return this.request<unknown>("DELETE", `/v1/channels/${channel.replace(/^#/, "")}/members/me`);
  }

  // team
  invite(invitee: string) {
    return this.request<unknown>("POST", "/v1/team/invites", { invitee });
  }

  acceptInvite(owner: string) {
    return this.request<unknown>("POST", `/v1/team/invites/${owner}/accept`);
  }

  declineInvite(owner: string) {
    return this.request<unknown>("POST", `/v1/team/invites/${owner}/decline`);
  }

  removeTeamMember(member: string) {
    return this.request<unknown>("DELETE", `/v1/team/members/${member}`);
  }

  leaveTeam(owner: string) {
    return this.request<unknown>("DELETE", `/v1/team/memberships/${owner}`);
  }

  // notifications
  notifications(since = 0) {
    return this.request<{ notifications: AppNotification[] }>(
      "GET",
      `/v1/notifications?since=${since}`,
    );
  }

  ack(notifId: string) {
    return this.request<{ acked: string }>("POST", `/v1/notifications/${notifId}/ack`);
  }
}
