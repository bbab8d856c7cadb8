// @vitest-environment jsdom
/** Rendering is a pure function of replayed state: the same event stream
 * must produce byte-identical DOM. */

import { describe, expect, it } from "vitest";

import { replay } from "../src/state.js";
import type { PersonaSet, ThemeOptions } from "../src/types.js";
import { CanvasView } from "../src/views/canvasView.js";
import { ChatPanel } from "../src/views/chatPanel.js";
import { PersonaPanel } from "../src/views/personaPanel.js";
import { UnitsPanel } from "../src/views/unitsPanel.js";
import { loadFixture } from "./scriptedServer.js";

const fixture = loadFixture();

function renderAll(): string {
  const state = replay(fixture.archive.events);
  const host = document.createElement("div");
  const canvas = new CanvasView(host);
  canvas.render(state.document!);
  new PersonaPanel(host).render(state.personas as PersonaSet);
  new UnitsPanel(host, {
    onHover: () => undefined,
    onAccept: () => undefined,
    onThemeOptions: async () => fixture.theme_options as ThemeOptions,
    onOpenDiscussion: () => undefined,
    onComment: () => undefined,
    onAdvance: () => undefined,
  }).render(state.units, state.personas, state.discussions);
  new ChatPanel(host, { onComment: () => undefined, onAdvance: () => undefined })
    .render(state.discussions[fixture.discussion_unit] ?? null, state.personas);
  return host.innerHTML;
}

describe("replay-render determinism", () => {
  it("same event stream renders identical DOM", () => {
    expect(renderAll()).toBe(renderAll());
  });

  it("prefix replay then suffix replay equals full replay in the DOM", () => {
    const events = fixture.archive.events;
    const mid = Math.floor(events.length / 2);
    const partial = replay(events.slice(mid), replay(events.slice(0, mid)));
    const full = replay(events);
    expect(partial).toEqual(full);
  });
});
