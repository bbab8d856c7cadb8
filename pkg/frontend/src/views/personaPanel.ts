/** Persona cards: avatar + name + summary; rationale tooltip on hover;
 * click expands the full eight-field profile. */

import type { ApiClient } from "../api.js";
import type { Persona, PersonaSet } from "../types.js";

const DETAIL_FIELDS: [keyof Persona, string][] = [
  ["name", "name"],
  ["summary", "summary"],
  ["background", "background"],
  ["motivation", "goal / motivation"],
  ["pain_point", "challenge / pain point"],
  ["need", "need"],
  ["quote", "quote"],
  ["rationale", "rationale"],
];

export class PersonaPanel {
  readonly root: HTMLElement;
  private expanded = new Set<string>();

  constructor(container: HTMLElement, private api: ApiClient | null = null) {
    this.root = document.createElement("section");
    this.root.className = "persona-panel";
    container.appendChild(this.root);
  }

  render(set: PersonaSet | null): void {
    this.root.innerHTML = "";
    if (!set) {
      this.root.textContent = "building personas…";
      return;
    }
    const dims = document.createElement("p");
    dims.className = "dimensions";
    dims.textContent = set.dimensions
      .map((d) => `${d.name} (${d.low_label} ↔ ${d.high_label})`)
      .join(" × ");
    this.root.appendChild(dims);
    for (const persona of set.personas) {
      this.root.appendChild(this.card(persona));
    }
  }

  private avatar(persona: Persona): HTMLElement {
    const url = this.api ? this.api.assetUrl(persona.avatar) : null;
    if (url) {
      const img = document.createElement("img");
      img.className = "avatar";
      img.src = url;
      img.alt = persona.name;
      return img;
    }
    const initials = document.createElement("span");
    initials.className = "avatar avatar-initials";
    initials.textContent = persona.name
      .split(/\s+/)
      .map((w) => w[0] ?? "")
      .join("")
      .toUpperCase();
    return initials;
  }

  private card(persona: Persona): HTMLElement {
    const card = document.createElement("article");
    card.className = "persona-card";
    card.dataset.personaId = persona.id;
    card.title = persona.rationale; // hover: the one-line rationale
    const header = document.createElement("header");
    header.append(this.avatar(persona));
    const name = document.createElement("strong");
    name.textContent = persona.name;
    const summary = document.createElement("span");
    summary.className = "persona-summary";
    summary.textContent = persona.summary;
    header.append(name, summary);
    card.appendChild(header);
    if (this.expanded.has(persona.id)) {
      const details = document.createElement("dl");
      details.className = "persona-details";
      for (const [key, label] of DETAIL_FIELDS) {
        const dt = document.createElement("dt");
        dt.textContent = label;
        const dd = document.createElement("dd");
        dd.textContent = String(persona[key] ?? "");
        details.append(dt, dd);
      }
      card.appendChild(details);
    }
    card.addEventListener("click", () => {
      if (this.expanded.has(persona.id)) this.expanded.delete(persona.id);
      else this.expanded.add(persona.id);
      card.dispatchEvent(new CustomEvent("persona-toggle", { bubbles: true }));
    });
    return card;
  }
}
