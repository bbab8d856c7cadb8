/** Wire types for the session API (documents travel as canonical JSON strings). */

export interface CanvasChild {
  id: string;
  type: "text" | "image" | "svg";
  x: number;
  y: number;
  width: number;
  height: number;
  rotation: number;
  text?: string;
  fontSize?: number;
  fontFamily?: string;
  fill?: string;
  src?: string;
  svgData?: string;
  zHint?: number;
  [key: string]: unknown;
}

export interface CanvasDoc {
  width: number;
  height: number;
  schemaVersion: number;
  children: CanvasChild[];
}

export interface Persona {
  id: string;
  name: string;
  summary: string;
  background: string;
  motivation: string;
  pain_point: string;
  need: string;
  quote: string;
  rationale: string;
  coords: [string, string] | null;
  avatar: string;
  origin: "generated" | "manual";
}

export interface PersonaSet {
  dimensions: { name: string; low_label: string; high_label: string; source: string }[];
  personas: Persona[];
}

export type ThemePreview = { tone: string; color: string };
export type Preview = string | ThemePreview;

export interface FeedbackItem {
  item_id: string;
  persona_id: string;
  target: string;
  kind: "text" | "image" | "theme";
  opinion: string;
  preview: Preview;
  rationale: string;
}

export type UnitStatus = "conflict" | "resolved";

export interface Conclusion {
  target: string;
  summary: string;
  preview: Preview;
  omitted_personas: string[];
}

export interface FeedbackUnit {
  unit_id: string;
  target: string;
  kind: "text" | "image" | "theme";
  items: FeedbackItem[];
  status: UnitStatus;
  conflict_summary: string | null;
  conclusion: Conclusion | null;
}

export type DiscussionState =
  | "awaiting_comment"
  | "questioning"
  | "answering"
  | "concluding"
  | "concluded";

export interface Turn {
  speaker: "moderator" | "user" | "persona";
  persona_id: string | null;
  addressee: string | null;
  text: string;
  round: number;
  role_tag: string;
}

export interface DiscussionSnapshot {
  discussion_id: string;
  unit_id: string;
  transcript: Turn[];
  state: DiscussionState;
  rounds_used: number;
  max_rounds: number;
  conclusion: Conclusion | null;
  user_comment: string | null;
}

export interface SessionEvent {
  seq: number;
  session_id: string;
  kind:
    | "created"
    | "personas_ready"
    | "feedback_ready"
    | "turn"
    | "accepted"
    | "manual_edit"
    | "theme_applied"
    | "failed";
  payload: Record<string, unknown>;
}

export interface SessionStatus {
  session_id: string;
  status: "created" | "personas_ready" | "feedback_ready" | "failed";
  error: string | null;
  snapshots: number;
  last_seq: number;
  feedback_errors: [string, string][];
}

export interface ThemeOption {
  template_id: string;
  similarity: number;
  preview: string;
}

export interface ThemeOptions {
  query: ThemePreview;
  ranked: ThemeOption[];
}

export function parseDoc(serialized: string): CanvasDoc {
  return JSON.parse(serialized) as CanvasDoc;
}

export function previewText(preview: Preview): string {
  if (typeof preview === "string") return preview;
  return `tone: ${preview.tone} / colors: ${preview.color}`;
}
