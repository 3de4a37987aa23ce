/**
 * Session view state: a pure projection of received protocol messages.
 * The reducer never computes enabledness, blocking, or configurations;
 * it only stores what the engine said.
 */

import { DeltaPush, ServerMessage, Snapshot, TraceEntry, isDelta } from "./types.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface SessionView {
  status: ConnectionStatus;
  snapshot: Snapshot | null;
  trace: TraceEntry[];
  violations: { seq: number; chart: string; copy: number; kind: string }[];
  lastError: string | null;
}

export function emptyView(): SessionView {
  return {
    status: "disconnected",
    snapshot: null,
    trace: [],
    violations: [],
    lastError: null,
  };
}

export function withStatus(view: SessionView, status: ConnectionStatus): SessionView {
  return { ...view, status };
}

function absorbEntries(view: SessionView, entries: TraceEntry[]): SessionView {
  if (!entries.length) return view;
  const known = new Set(view.trace.map((e) => e.seq));
  const fresh = entries.filter((e) => !known.has(e.seq));
  const violations = [...view.violations];
  for (const entry of fresh) {
    for (const v of entry.violations) {
      violations.push({ seq: entry.seq, ...v });
    }
  }
  return { ...view, trace: [...view.trace, ...fresh], violations };
}

/** Fold one server message into the view. */
export function applyMessage(view: SessionView, msg: ServerMessage): SessionView {
  if (isDelta(msg)) {
    const next = absorbEntries(view, msg.entries);
    return { ...next, snapshot: msg.snapshot };
  }
  if (!msg.ok) {
    return { ...view, lastError: msg.error };
  }
  let next: SessionView = { ...view, lastError: null };
  if (msg.entries) {
    next = absorbEntries(next, msg.entries);
  }
  if (msg.snapshot) {
    next = { ...next, snapshot: msg.snapshot };
  }
  return next;
}

/** Fresh-session reset (after a reset command round-trips). */
export function clearedView(view: SessionView): SessionView {
  return { ...emptyView(), status: view.status };
}

/** Injectable environment events, derived from class declarations. */
export interface PaletteEntry {
  object: string;
  event: string;
  arity: number;
  kind: "signal" | "setter";
}

export function palette(snapshot: Snapshot | null): PaletteEntry[] {
  if (!snapshot) return [];
  const out: PaletteEntry[] = [];
  for (const [objectId, className] of Object.entries(snapshot.objects)) {
    const decl = snapshot.classes[className];
    if (!decl) continue;
    for (const [event, arity] of decl.signals) {
      out.push({ object: objectId, event, arity, kind: "signal" });
    }
    for (const [event, arity] of decl.setters) {
      out.push({ object: objectId, event, arity, kind: "setter" });
    }
  }
  return out;
}
