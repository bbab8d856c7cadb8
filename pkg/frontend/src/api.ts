/** Thin fetch client for the session API. */

import type {
  DiscussionSnapshot,
  PersonaSet,
  SessionStatus,
  FeedbackUnit,
  ThemeOptions,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, (body as { error?: string }).error ?? resp.statusText);
  }
  return body as T;
}

export interface BriefPage {
  text?: string;
  image_base64?: string;
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  assetUrl(ref: string): string | null {
    if (!ref.startsWith("asset://")) return null;
    return this.url(`/assets/${ref.slice("asset://".length)}`);
  }

  createSession(sourceName: string, pages: BriefPage[], draft: string) {
    return request<{ session_id: string }>(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify({ brief: { source_name: sourceName, pages }, draft }),
    });
  }

  status(sessionId: string) {
    return request<SessionStatus>(this.url(`/sessions/${sessionId}/status`));
  }

  personas(sessionId: string) {
    return request<PersonaSet>(this.url(`/sessions/${sessionId}/personas`));
  }

  addPersona(sessionId: string, details: Record<string, string>) {
    return request<PersonaSet>(this.url(`/sessions/${sessionId}/personas`), {
      method: "POST",
      body: JSON.stringify(details),
    });
  }

  units(sessionId: string) {
    return request<{ units: FeedbackUnit[] }>(this.url(`/sessions/${sessionId}/units`));
  }

  document(sessionId: string) {
    return request<{ snapshot: number; document: string }>(
      this.url(`/sessions/${sessionId}/document`),
    );
  }

  accept(sessionId: string, ref: string, templateId?: string) {
    return request<{ snapshot: number; document: string }>(
      this.url(`/sessions/${sessionId}/accept`),
      { method: "POST", body: JSON.stringify({ ref, template_id: templateId ?? null }) },
    );
  }

  themeOptions(sessionId: string, ref: string) {
    return request<ThemeOptions>(this.url(`/sessions/${sessionId}/theme-options/${ref}`));
  }

  manualEdit(sessionId: string, document: string) {
    return request<{ snapshot: number; document: string }>(
      this.url(`/sessions/${sessionId}/manual-edit`),
      { method: "POST", body: JSON.stringify({ document }) },
    );
  }

  openDiscussion(sessionId: string, unitId: string) {
    return request<DiscussionSnapshot>(
      this.url(`/sessions/${sessionId}/units/${unitId}/discussion`),
      { method: "POST" },
    );
  }

  comment(sessionId: string, unitId: string, comment: string | null) {
    return request<DiscussionSnapshot>(
      this.url(`/sessions/${sessionId}/units/${unitId}/comment`),
      { method: "POST", body: JSON.stringify({ comment }) },
    );
  }

  advance(sessionId: string, unitId: string) {
    return request<DiscussionSnapshot>(
      this.url(`/sessions/${sessionId}/units/${unitId}/advance`),
      { method: "POST" },
    );
  }

  eventsUrl(sessionId: string, cursor: number): string {
    return this.url(`/sessions/${sessionId}/events?cursor=${cursor}&follow=true`);
  }
}
