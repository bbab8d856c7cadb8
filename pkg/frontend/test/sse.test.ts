import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { EventStream } from "../src/sse.js";
import { replay } from "../src/state.js";
import type { SessionEvent } from "../src/types.js";
import { loadFixture, startScriptedServer, type ScriptedServer } from "./scriptedServer.js";

let server: ScriptedServer;

beforeEach(async () => {
  server = await startScriptedServer();
});

afterEach(async () => {
  await server.close();
});

function collectUntil(
  count: number,
  cursor = 0,
): { stream: EventStream; done: Promise<SessionEvent[]> } {
  const received: SessionEvent[] = [];
  let stream: EventStream;
  const done = new Promise<SessionEvent[]>((resolve) => {
    stream = new EventStream(
      (c) => `${server.url}/sessions/${server.sessionId}/events?cursor=${c}&follow=true`,
      (event) => {
        received.push(event);
        if (received.length >= count) {
          stream.close();
          resolve(received);
        }
      },
      { retryDelayMs: 5 },
    );
    stream.cursor = cursor;
    void stream.run().then(() => resolve(received));
  });
  return { stream: stream!, done };
}

const totalEvents = loadFixture().archive.events.length;

describe("event stream", () => {
  it("delivers the full log in order", async () => {
    const { done } = collectUntil(totalEvents);
    const events = await done;
    expect(events.map((e) => e.seq)).toEqual(
      Array.from({ length: totalEvents }, (_, i) => i + 1),
    );
  });

  it("resumes from a cursor without duplicates", async () => {
    const { done } = collectUntil(totalEvents - 4, 4);
    const events = await done;
    expect(events.map((e) => e.seq)).toEqual(
      Array.from({ length: totalEvents - 4 }, (_, i) => i + 5),
    );
  });

  it("loses zero turns when the connection drops mid-discussion", async () => {
    server.dropAfter(5); // connection dies after five events; client must resume
    const { done } = collectUntil(totalEvents);
    const events = await done;
    expect(server.connectionCount()).toBeGreaterThanOrEqual(2);
    expect(events.map((e) => e.seq)).toEqual(
      Array.from({ length: totalEvents }, (_, i) => i + 1),
    );
    // and the state rebuilt from the dropped+resumed stream is identical
    const direct = replay(loadFixture().archive.events);
    expect(replay(events)).toEqual(direct);
  });
});
