/** Feedback units: summary on top, per-persona items with hover previews,
 * accept buttons, the ranked template grid for theme acceptance, and
 * state-colored card backgrounds. Hovering a unit highlights its target
 * element on the canvas. */

import type { ApiClient } from "../api.js";
import type { FeedbackUnit, PersonaSet, ThemeOptions } from "../types.js";
import { highlightTarget, unitColorClass } from "../state.js";
import { previewText } from "../types.js";

export interface UnitsPanelHandlers {
  onHover(elementId: string | null | undefined): void;
  onAccept(ref: string, templateId?: string): void;
  onThemeOptions(ref: string): Promise<ThemeOptions>;
  onOpenDiscussion(unitId: string): void;
  onComment(unitId: string, comment: string | null): void;
  onAdvance(unitId: string): void;
}

export class UnitsPanel {
  readonly root: HTMLElement;

  constructor(
    container: HTMLElement,
    private handlers: UnitsPanelHandlers,
    private api: ApiClient | null = null,
  ) {
    this.root = document.createElement("section");
    this.root.className = "units-panel";
    container.appendChild(this.root);
  }

  render(units: FeedbackUnit[], personas: PersonaSet | null,
         discussions: Record<string, { state: string; transcript: unknown[] }>): void {
    this.root.innerHTML = "";
    if (!units.length) {
      this.root.textContent = "collecting feedback…";
      return;
    }
    for (const unit of units) {
      this.root.appendChild(this.unitCard(unit, personas, discussions[unit.unit_id]));
    }
  }

  private personaName(personas: PersonaSet | null, personaId: string): string {
    const p = personas?.personas.find((x) => x.id === personaId);
    return p ? p.name : personaId;
  }

  private unitCard(
    unit: FeedbackUnit,
    personas: PersonaSet | null,
    discussion: { state: string } | undefined,
  ): HTMLElement {
    const card = document.createElement("article");
    card.className = `unit-card ${unitColorClass(unit.status)}`;
    card.dataset.unitId = unit.unit_id;
    card.addEventListener("mouseenter", () =>
      this.handlers.onHover(highlightTarget(unit)));
    card.addEventListener("mouseleave", () => this.handlers.onHover(undefined));

    const head = document.createElement("header");
    const label = document.createElement("strong");
    label.textContent =
      unit.kind === "theme" ? "theme" : `${unit.kind} · ${unit.target}`;
    head.appendChild(label);
    const summary = document.createElement("p");
    summary.className = "unit-summary";
    summary.textContent = unit.conclusion
      ? unit.conclusion.summary
      : unit.conflict_summary ?? "no conflicting suggestions";
    head.appendChild(summary);
    card.appendChild(head);

    const list = document.createElement("ul");
    for (const item of unit.items) {
      const li = document.createElement("li");
      li.className = "feedback-item";
      li.dataset.itemId = item.item_id;
      li.title = previewText(item.preview); // hover preview tooltip
      const who = document.createElement("em");
      who.textContent = this.personaName(personas, item.persona_id);
      const opinion = document.createElement("span");
      opinion.textContent = ` ${item.opinion}`;
      li.append(who, opinion, this.acceptControl(unit, item.item_id));
      list.appendChild(li);
    }
    card.appendChild(list);

    if (unit.conclusion) {
      const conclusion = document.createElement("p");
      conclusion.className = "conclusion";
      conclusion.title = previewText(unit.conclusion.preview);
      conclusion.textContent = `conclusion: ${unit.conclusion.summary}`;
      conclusion.appendChild(this.acceptControl(unit, `conclusion:${unit.unit_id}`));
      card.appendChild(conclusion);
    }

    card.appendChild(this.discussionControls(unit, discussion));
    return card;
  }

  private acceptControl(unit: FeedbackUnit, ref: string): HTMLElement {
    const btn = document.createElement("button");
    btn.className = "accept";
    btn.dataset.ref = ref;
    btn.textContent = "accept";
    btn.addEventListener("click", async (ev) => {
      ev.stopPropagation();
      if (unit.kind !== "theme") {
        this.handlers.onAccept(ref);
        return;
      }
      const options = await this.handlers.onThemeOptions(ref);
      this.showTemplateGrid(ref, options);
    });
    return btn;
  }

  private showTemplateGrid(ref: string, options: ThemeOptions): void {
    const existing = this.root.querySelector(".template-grid");
    existing?.remove();
    const grid = document.createElement("div");
    grid.className = "template-grid";
    const caption = document.createElement("p");
    caption.textContent =
      `templates for tone "${options.query.tone}", colors "${options.query.color}"`;
    grid.appendChild(caption);
    for (const option of options.ranked) {
      const cell = document.createElement("button");
      cell.className = "template-cell";
      cell.dataset.templateId = option.template_id;
      const url = this.api ? this.api.assetUrl(option.preview) : null;
      if (url) {
        const img = document.createElement("img");
        img.src = url;
        img.alt = option.template_id;
        cell.appendChild(img);
      }
      const tag = document.createElement("span");
      tag.textContent = `${option.template_id} (${option.similarity.toFixed(3)})`;
      cell.appendChild(tag);
      cell.addEventListener("click", () => {
        grid.remove();
        this.handlers.onAccept(ref, option.template_id);
      });
      grid.appendChild(cell);
    }
    this.root.appendChild(grid);
  }

  private discussionControls(
    unit: FeedbackUnit,
    discussion: { state: string } | undefined,
  ): HTMLElement {
    const controls = document.createElement("div");
    controls.className = "discussion-controls";
    if (!discussion) {
      const start = document.createElement("button");
      start.className = "start-discussion";
      start.textContent = "Start a discussion";
      start.disabled = unit.items.length < 2 || unit.status !== "conflict";
      start.addEventListener("click", (ev) => {
        ev.stopPropagation();
        this.handlers.onOpenDiscussion(unit.unit_id);
      });
      controls.appendChild(start);
    }
    return controls;
  }
}
