/** Discussion chat for the selected unit: turns by speaker with avatars,
 * and the comment composer that is writable only in awaiting_comment and
 * concluded states. */

import type { ApiClient } from "../api.js";
import type { DiscussionSnapshot, PersonaSet } from "../types.js";
import { composerEnabled } from "../state.js";

export interface ChatHandlers {
  onComment(unitId: string, comment: string | null): void;
  onAdvance(unitId: string): void;
}

export class ChatPanel {
  readonly root: HTMLElement;

  constructor(
    container: HTMLElement,
    private handlers: ChatHandlers,
    private api: ApiClient | null = null,
  ) {
    this.root = document.createElement("section");
    this.root.className = "chat-panel";
    container.appendChild(this.root);
  }

  render(discussion: DiscussionSnapshot | null, personas: PersonaSet | null): void {
    this.root.innerHTML = "";
    if (!discussion) {
      this.root.textContent = "no discussion open";
      return;
    }
    const state = document.createElement("p");
    state.className = "chat-state";
    state.textContent = `state: ${discussion.state} · round ${discussion.rounds_used}/${discussion.max_rounds}`;
    this.root.appendChild(state);

    const feed = document.createElement("ol");
    feed.className = "chat-feed";
    for (const turn of discussion.transcript) {
      const li = document.createElement("li");
      li.className = `turn turn-${turn.role_tag}`;
      const speaker = document.createElement("strong");
      if (turn.speaker === "persona" && turn.persona_id) {
        const persona = personas?.personas.find((p) => p.id === turn.persona_id);
        speaker.textContent = persona ? persona.name : turn.persona_id;
        const url = persona && this.api ? this.api.assetUrl(persona.avatar) : null;
        if (url) {
          const img = document.createElement("img");
          img.className = "avatar avatar-small";
          img.src = url;
          img.alt = speaker.textContent;
          li.appendChild(img);
        }
      } else {
        speaker.textContent = turn.speaker === "user" ? "you" : "moderator";
      }
      const text = document.createElement("span");
      text.textContent = ` ${turn.text}`;
      li.append(speaker, text);
      feed.appendChild(li);
    }
    this.root.appendChild(feed);

    if (discussion.conclusion) {
      const banner = document.createElement("p");
      banner.className = "conclusion-banner";
      banner.textContent = `conclusion: ${discussion.conclusion.summary}`;
      this.root.appendChild(banner);
    }

    const composer = document.createElement("form");
    composer.className = "composer";
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = discussion.state === "concluded"
      ? "comment to start another round (optional)"
      : "your comment for the panel (optional)";
    const enabled = composerEnabled(discussion.state);
    input.disabled = !enabled;
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "send";
    send.disabled = !enabled;
    composer.append(input, send);
    composer.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.handlers.onComment(discussion.unit_id, input.value.trim() || null);
    });
    this.root.appendChild(composer);

    if (discussion.state === "questioning") {
      const advance = document.createElement("button");
      advance.className = "advance";
      advance.textContent = "run the panel";
      advance.addEventListener("click", () => this.handlers.onAdvance(discussion.unit_id));
      this.root.appendChild(advance);
    }
  }
}
