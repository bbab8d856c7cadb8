/** Pure session view-state: a reducer over server snapshots and events.
 *
 * Rendering is a function of this state only; replaying the same event
 * stream always yields an identical state (and therefore identical DOM).
 */

import type {
  CanvasDoc,
  DiscussionSnapshot,
  DiscussionState,
  FeedbackUnit,
  PersonaSet,
  SessionEvent,
  UnitStatus,
} from "./types.js";
import { parseDoc } from "./types.js";

export interface AppState {
  sessionId: string | null;
  status: string;
  error: string | null;
  personas: PersonaSet | null;
  units: FeedbackUnit[];
  document: CanvasDoc | null;
  discussions: Record<string, DiscussionSnapshot>;
  cursor: number;
}

export function initialState(): AppState {
  return {
    sessionId: null,
    status: "created",
    error: null,
    personas: null,
    units: [],
    document: null,
    discussions: {},
    cursor: 0,
  };
}

function resolveUnit(units: FeedbackUnit[], unitId: string | undefined,
                     conclusion?: DiscussionSnapshot["conclusion"]): FeedbackUnit[] {
  if (!unitId) return units;
  return units.map((u) =>
    u.unit_id === unitId
      ? {
          ...u,
          status: "resolved" as UnitStatus,
          conflict_summary: conclusion ? null : u.conflict_summary,
          conclusion: conclusion ?? u.conclusion,
        }
      : u,
  );
}

/** Fold one server event; returns a new state object (input untouched). */
export function reduce(state: AppState, event: SessionEvent): AppState {
  if (event.seq <= state.cursor) return state;
  const next: AppState = { ...state, cursor: event.seq };
  const p = event.payload as Record<string, any>;
  switch (event.kind) {
    case "created":
      next.sessionId = event.session_id;
      next.document = parseDoc(p.document as string);
      next.status = "created";
      break;
    case "personas_ready":
      next.personas = p.personas as PersonaSet;
      if (next.status === "created") next.status = "personas_ready";
      break;
    case "feedback_ready":
      next.units = p.units as FeedbackUnit[];
      next.status = "feedback_ready";
      break;
    case "turn": {
      const snapshot = p.discussion as DiscussionSnapshot;
      next.discussions = { ...state.discussions, [snapshot.unit_id]: snapshot };
      if (snapshot.state === "concluded" && snapshot.conclusion) {
        next.units = resolveUnit(state.units, snapshot.unit_id, snapshot.conclusion);
      }
      break;
    }
    case "accepted":
    case "theme_applied":
      next.document = parseDoc(p.document as string);
      next.units = resolveUnit(state.units, p.unit_id as string | undefined);
      break;
    case "manual_edit":
      next.document = parseDoc(p.document as string);
      break;
    case "failed":
      next.status = "failed";
      next.error = p.message as string;
      break;
  }
  return next;
}

export function replay(events: SessionEvent[], from: AppState = initialState()): AppState {
  return events.reduce(reduce, from);
}

/** Unit card background per server status: blue resolved, red conflict. */
export function unitColorClass(status: UnitStatus): string {
  return status === "resolved" ? "unit-resolved" : "unit-conflict";
}

/** The comment composer is writable only before questioning starts and
 * after a conclusion (the iteration affordance). */
export function composerEnabled(state: DiscussionState | undefined): boolean {
  return state === "awaiting_comment" || state === "concluded";
}

/** Element to outline when a unit is hovered; null highlights the page
 * border (theme units have no single target element). */
export function highlightTarget(unit: FeedbackUnit): string | null {
  return unit.kind === "theme" ? null : unit.target;
}
