/** Render-only poster view: absolutely positioned boxes scaled to fit,
 * a hover highlight outline, and a minimal click-to-edit inspector that
 * submits whole-document manual edits. */

import type { CanvasChild, CanvasDoc } from "../types.js";
import type { ApiClient } from "../api.js";

export interface ManualEditHandler {
  (document: CanvasDoc): void;
}

export class CanvasView {
  readonly root: HTMLElement;
  private page: HTMLElement;
  private outline: HTMLElement;
  private doc: CanvasDoc | null = null;
  private scale = 1;
  private selected: string | null = null;
  private inspector: HTMLElement;

  constructor(
    container: HTMLElement,
    private api: ApiClient | null = null,
    private onManualEdit: ManualEditHandler | null = null,
    private maxWidth = 560,
  ) {
    this.root = document.createElement("div");
    this.root.className = "canvas-view";
    this.page = document.createElement("div");
    this.page.className = "canvas-page";
    this.outline = document.createElement("div");
    this.outline.className = "canvas-highlight";
    this.outline.style.display = "none";
    this.inspector = document.createElement("div");
    this.inspector.className = "canvas-inspector";
    this.inspector.style.display = "none";
    this.root.append(this.page, this.inspector);
    container.appendChild(this.root);
  }

  render(doc: CanvasDoc): void {
    this.doc = doc;
    this.scale = Math.min(1, this.maxWidth / doc.width);
    this.page.innerHTML = "";
    this.page.style.width = `${doc.width * this.scale}px`;
    this.page.style.height = `${doc.height * this.scale}px`;
    for (const child of doc.children) {
      this.page.appendChild(this.renderChild(child));
    }
    this.page.appendChild(this.outline);
    this.highlight(null);
  }

  private renderChild(child: CanvasChild): HTMLElement {
    const el = document.createElement("div");
    el.className = `canvas-el canvas-${child.type}`;
    el.dataset.elementId = child.id;
    const s = this.scale;
    el.style.left = `${child.x * s}px`;
    el.style.top = `${child.y * s}px`;
    el.style.width = `${child.width * s}px`;
    el.style.height = `${child.height * s}px`;
    if (child.rotation) el.style.transform = `rotate(${child.rotation}deg)`;
    if (child.type === "text") {
      el.textContent = child.text ?? "";
      el.style.fontSize = `${(child.fontSize ?? 16) * s}px`;
      el.style.fontFamily = child.fontFamily ?? "sans-serif";
      el.style.color = child.fill ?? "#000";
    } else if (child.type === "image") {
      const assetUrl = this.api && child.src ? this.api.assetUrl(child.src) : null;
      if (assetUrl) {
        const img = document.createElement("img");
        img.src = assetUrl;
        img.alt = child.id;
        el.appendChild(img);
      } else {
        el.textContent = child.src ? `image: ${child.src}` : "image";
      }
    }
    if (this.onManualEdit) {
      el.addEventListener("click", () => this.openInspector(child.id));
    }
    return el;
  }

  /** Outline one element by id, or the page border when id is null. */
  highlight(elementId: string | null | undefined): void {
    if (elementId === undefined) {
      this.outline.style.display = "none";
      this.page.classList.remove("page-highlight");
      return;
    }
    if (elementId === null) {
      this.outline.style.display = "none";
      this.page.classList.add("page-highlight");
      return;
    }
    this.page.classList.remove("page-highlight");
    const target = this.page.querySelector<HTMLElement>(
      `[data-element-id="${elementId}"]`,
    );
    if (!target) {
      this.outline.style.display = "none";
      return;
    }
    this.outline.style.display = "block";
    this.outline.style.left = target.style.left;
    this.outline.style.top = target.style.top;
    this.outline.style.width = target.style.width;
    this.outline.style.height = target.style.height;
  }

  highlightedElementIds(): string[] {
    if (this.outline.style.display === "none") return [];
    const ids: string[] = [];
    for (const el of this.page.querySelectorAll<HTMLElement>("[data-element-id]")) {
      if (
        el.style.left === this.outline.style.left &&
        el.style.top === this.outline.style.top &&
        el.style.width === this.outline.style.width &&
        el.style.height === this.outline.style.height
      ) {
        ids.push(el.dataset.elementId as string);
      }
    }
    return ids;
  }

  private openInspector(elementId: string): void {
    if (!this.doc) return;
    this.selected = elementId;
    const child = this.doc.children.find((c) => c.id === elementId);
    if (!child) return;
    this.inspector.innerHTML = "";
    this.inspector.style.display = "block";
    const title = document.createElement("strong");
    title.textContent = `edit ${child.id}`;
    this.inspector.appendChild(title);
    const fields: [string, keyof CanvasChild][] = [
      ["x", "x"], ["y", "y"], ["width", "width"], ["height", "height"],
    ];
    const inputs: Record<string, HTMLInputElement> = {};
    for (const [label, key] of fields) {
      const input = document.createElement("input");
      input.type = "number";
      input.value = String(child[key]);
      input.dataset.field = label;
      inputs[label] = input;
      const wrap = document.createElement("label");
      wrap.textContent = label;
      wrap.appendChild(input);
      this.inspector.appendChild(wrap);
    }
    let textInput: HTMLInputElement | null = null;
    if (child.type === "text") {
      textInput = document.createElement("input");
      textInput.type = "text";
      textInput.value = child.text ?? "";
      textInput.dataset.field = "text";
      const wrap = document.createElement("label");
      wrap.textContent = "text";
      wrap.appendChild(textInput);
      this.inspector.appendChild(wrap);
    }
    const apply = document.createElement("button");
    apply.textContent = "apply edit";
    apply.addEventListener("click", () => {
      if (!this.doc || !this.onManualEdit) return;
      const children = this.doc.children.map((c) => {
        if (c.id !== elementId) return c;
        const edited: CanvasChild = {
          ...c,
          x: Number(inputs.x!.value),
          y: Number(inputs.y!.value),
          width: Number(inputs.width!.value),
          height: Number(inputs.height!.value),
        };
        if (textInput) edited.text = textInput.value;
        return edited;
      });
      this.inspector.style.display = "none";
      this.onManualEdit({ ...this.doc, children });
    });
    this.inspector.appendChild(apply);
  }
}
