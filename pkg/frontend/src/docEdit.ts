/** Serialize an edited document for the manual-edit endpoint.
 *
 * The server owns canonical form; this only needs to produce valid wire
 * JSON with the edited values. */

import type { CanvasDoc } from "./types.js";

export function serializeForManualEdit(doc: CanvasDoc): string {
  return JSON.stringify(doc);
}
