/** Server-sent events consumer with cursor-based resume.
 *
 * Uses fetch streaming rather than EventSource so it runs identically in the
 * browser and in node tests. The cursor advances per delivered event; on any
 * disconnect the stream reopens from the last cursor, so no event is lost or
 * delivered twice.
 */

import type { SessionEvent } from "./types.js";

export interface EventStreamOptions {
  retryDelayMs?: number;
  fetchImpl?: typeof fetch;
}

export class EventStream {
  cursor = 0;
  private closed = false;
  private retryDelayMs: number;
  private fetchImpl: typeof fetch;

  constructor(
    private urlForCursor: (cursor: number) => string,
    private onEvent: (event: SessionEvent) => void,
    options: EventStreamOptions = {},
  ) {
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  close(): void {
    this.closed = true;
  }

  /** Runs until close(); resolves after the final connection ends. */
  async run(): Promise<void> {
    while (!this.closed) {
      try {
        await this.consumeOnce();
      } catch {
        // fall through to retry
      }
      if (!this.closed) {
        await new Promise((resolve) => setTimeout(resolve, this.retryDelayMs));
      }
    }
  }

  private async consumeOnce(): Promise<void> {
    const resp = await this.fetchImpl(this.urlForCursor(this.cursor));
    if (!resp.ok || !resp.body) throw new Error(`stream failed: ${resp.status}`);
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.closed) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary >= 0) {
        this.handleMessage(buffer.slice(0, boundary));
        buffer = buffer.slice(boundary + 2);
        boundary = buffer.indexOf("\n\n");
      }
    }
    if (this.closed) await reader.cancel().catch(() => undefined);
  }

  private handleMessage(message: string): void {
    for (const line of message.split("\n")) {
      if (!line.startsWith("data: ")) continue;
      const event = JSON.parse(line.slice("data: ".length)) as SessionEvent;
      if (event.seq <= this.cursor) continue; // replayed duplicate
      this.cursor = event.seq;
      this.onEvent(event);
    }
  }
}
