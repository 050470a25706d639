// Notification stream: one persistent NDJSON connection with exponential
// backoff on reconnect. Blank lines are server keepalives.

import type { AppNotification } from "./api.js";

export const BACKOFF_BASE_MS = 1000;
export const BACKOFF_CAP_MS = 30000;

export function nextDelay(attempt: number): number {
  return Math.min(BACKOFF_BASE_MS * 2 ** attempt, BACKOFF_CAP_MS);
}

export interface StreamHandle {
  stop(): void;
}

export function openNotificationStream(
  baseUrl: string,
  token: string,
  onNotification: (n: AppNotification) => void,
  onStateChange?: (connected: boolean) => void,
): StreamHandle {
  let stopped = false;
  let attempt = 0;
  let controller: AbortController | null = null;

  async function connect(): Promise<void> {
    while (!stopped) {
      controller = new AbortController();
      try {
        const resp = await fetch(baseUrl + "/v1/notifications/stream", {
          headers: { Authorization: `Bearer ${token}` },
          signal: controller.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`stream: ${resp.status}`);
        onStateChange?.(true);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let nl;
          while ((nl = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, nl).trim();
            buffer = buffer.slice(nl + 1);
            if (!line) continue; // keepalive
            onNotification(JSON.parse(line) as AppNotification);
            attempt = 0;
          }
        }
      } catch {
        // fall through to backoff
      }
      onStateChange?.(false);
      if (stopped) return;
      await new Promise((r) => setTimeout(r, nextDelay(attempt)));
      attempt += 1;
    }
  }

  void connect();
  return {
    stop() {
      stopped = true;
      controller?.abort();
    },
  };
}
