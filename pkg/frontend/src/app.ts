/** Application shell: session creation, event subscription, and re-render
 * on every state change. The document shown always comes from the last
 * server-validated snapshot; there is no optimistic local mutation. */

import { ApiClient } from "./api.js";
import { EventStream } from "./sse.js";
import { AppState, initialState, reduce } from "./state.js";
import type { SessionEvent } from "./types.js";
import { serializeForManualEdit } from "./docEdit.js";
import { CanvasView } from "./views/canvasView.js";
import { ChatPanel } from "./views/chatPanel.js";
import { PersonaPanel } from "./views/personaPanel.js";
import { UnitsPanel } from "./views/unitsPanel.js";

export class App {
  state: AppState = initialState();
  private stream: EventStream | null = null;
  private canvas: CanvasView;
  private personaPanel: PersonaPanel;
  private unitsPanel: UnitsPanel;
  private chatPanel: ChatPanel;
  private statusLine: HTMLElement;
  private selectedUnit: string | null = null;

  constructor(private rootEl: HTMLElement, private api: ApiClient) {
    this.statusLine = document.createElement("p");
    this.statusLine.className = "status-line";
    const layout = document.createElement("div");
    layout.className = "layout";
    const left = document.createElement("div");
    left.className = "layout-left";
    const right = document.createElement("div");
    right.className = "layout-right";
    layout.append(left, right);
    rootEl.append(this.statusLine, layout);

    this.canvas = new CanvasView(left, api, (doc) => {
      void this.api.manualEdit(this.state.sessionId!, serializeForManualEdit(doc));
    });
    this.personaPanel = new PersonaPanel(right, api);
    this.unitsPanel = new UnitsPanel(right, {
      onHover: (id) => this.canvas.highlight(id),
      onAccept: (ref, templateId) => void this.accept(ref, templateId),
      onThemeOptions: (ref) => this.api.themeOptions(this.state.sessionId!, ref),
      onOpenDiscussion: (unitId) => void this.openDiscussion(unitId),
      onComment: (unitId, comment) => void this.comment(unitId, comment),
      onAdvance: (unitId) => void this.advance(unitId),
    }, api);
    this.chatPanel = new ChatPanel(right, {
      onComment: (unitId, comment) => void this.comment(unitId, comment),
      onAdvance: (unitId) => void this.advance(unitId),
    }, api);
  }

  async startSession(sourceName: string, briefText: string, draft: string): Promise<void> {
    const { session_id } = await this.api.createSession(
      sourceName, [{ text: briefText }], draft);
    this.state = { ...initialState(), sessionId: session_id };
    this.subscribe(session_id);
  }

  /** Re-attach to an existing session (e.g. after a reload). */
  resume(sessionId: string): void {
    this.state = { ...initialState(), sessionId };
    this.subscribe(sessionId);
  }

  private subscribe(sessionId: string): void {
    this.stream?.close();
    this.stream = new EventStream(
      (cursor) => this.api.eventsUrl(sessionId, cursor),
      (event) => this.onEvent(event),
    );
    void this.stream.run();
  }

  onEvent(event: SessionEvent): void {
    this.state = reduce(this.state, event);
    this.render();
  }

  private async accept(ref: string, templateId?: string): Promise<void> {
    try {
      await this.api.accept(this.state.sessionId!, ref, templateId);
    } catch (err) {
      this.toast(String(err));
    }
  }

  private async openDiscussion(unitId: string): Promise<void> {
    try {
      await this.api.openDiscussion(this.state.sessionId!, unitId);
      this.selectedUnit = unitId;
    } catch (err) {
      this.toast(String(err));
    }
  }

  private async comment(unitId: string, comment: string | null): Promise<void> {
    try {
      await this.api.comment(this.state.sessionId!, unitId, comment);
      await this.api.advance(this.state.sessionId!, unitId);
    } catch (err) {
      this.toast(String(err));
    }
  }

  private async advance(unitId: string): Promise<void> {
    try {
      await this.api.advance(this.state.sessionId!, unitId);
    } catch (err) {
      this.toast(String(err));
    }
  }

  toast(message: string): void {
    this.statusLine.dataset.toast = message;
  }

  render(): void {
    const s = this.state;
    this.statusLine.textContent =
      `session ${s.sessionId ?? "-"} · ${s.status}${s.error ? ` · ${s.error}` : ""}`;
    if (s.document) this.canvas.render(s.document);
    this.personaPanel.render(s.personas);
    this.unitsPanel.render(s.units, s.personas, s.discussions);
    const unitId = this.selectedUnit ?? Object.keys(s.discussions)[0] ?? null;
    this.chatPanel.render(unitId ? s.discussions[unitId] ?? null : null, s.personas);
  }
}
