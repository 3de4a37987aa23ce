/**
 * Plain-text rendering of the session view: machines, chart copies,
 * store values, obligations, violations, the trace tail, and the
 * injectable-event palette. Pure string building; no terminal control.
 */

import { JsonValue, TraceEntry } from "./types.js";
import { PaletteEntry, SessionView, palette } from "./view.js";

function fmtValue(v: JsonValue): string {
  if (typeof v === "object" && v !== null) {
    return v.ref === null ? "null" : `@${v.ref}`;
  }
  return JSON.stringify(v);
}

export function entryLine(entry: TraceEntry): string {
  const args = entry.args.map(fmtValue).join(", ");
  let line = `[${entry.seq}] t=${entry.clock} ${entry.origin} ` +
    `${entry.src} -> ${entry.dst} ${entry.event}(${args})`;
  for (const v of entry.violations) {
    line += `  !${v.kind}:${v.chart}#${v.copy}`;
  }
  if (entry.quiescent) line += "  .";
  return line;
}

export function renderView(view: SessionView, traceTail = 12): string {
  const lines: string[] = [];
  lines.push(`connection: ${view.status}`);
  if (view.lastError) lines.push(`last error: ${view.lastError}`);
  const snap = view.snapshot;
  if (!snap) {
    lines.push("(no snapshot yet)");
    return lines.join("\n");
  }
  lines.push(`clock: ${snap.clock}  entries: ${snap.seq}` +
    (snap.halted ? "  HALTED" : ""));

  lines.push("objects:");
  for (const [id, values] of Object.entries(snap.store)) {
    const pairs = Object.entries(values)
      .map(([k, v]) => `${k}=${fmtValue(v)}`).join(" ");
    lines.push(`  ${id} : ${snap.objects[id]}  ${pairs}`.trimEnd());
  }

  const machines = Object.entries(snap.machines);
  if (machines.length) {
    lines.push("machines:");
    for (const [owner, m] of machines) {
      lines.push(`  ${owner}  {${m.config.join(", ")}}`);
    }
  }

  if (snap.playout.copies.length) {
    lines.push("chart copies:");
    for (const c of snap.playout.copies) {
      const bindings = [
        ...Object.entries(c.lifelines).map(([k, v]) => `${k}=${v}`),
        ...Object.entries(c.vars).map(([k, v]) => `${k}=${fmtValue(v)}`),
      ].join(" ");
      const cut = Object.entries(c.cut)
        .map(([k, v]) => `${k}:${v}`).join(" ");
      lines.push(`  ${c.chart}#${c.copy_id} [${c.status}] ` +
        `cut{${cut}} ${bindings}`.trimEnd());
    }
  } else {
    lines.push("chart copies: none");
  }

  if (snap.obligations.length) {
    lines.push("obligations:");
    for (const o of snap.obligations) {
      lines.push(`  ${o.chart}#${o.copy} must still see: ${o.messages.join(", ")}`);
    }
  }

  if (view.violations.length) {
    lines.push("violations:");
    for (const v of view.violations) {
      lines.push(`  seq ${v.seq}: ${v.kind} in ${v.chart}#${v.copy}`);
    }
  }

  lines.push(`trace (${view.trace.length} entries):`);
  for (const entry of view.trace.slice(-traceTail)) {
    lines.push("  " + entryLine(entry));
  }
  return lines.join("\n");
}

export function renderPalette(entries: PaletteEntry[]): string {
  if (!entries.length) return "(no injectable events)";
  return entries
    .map((p, i) => `${String(i).padStart(3)}: ${p.object}.${p.event}/${p.arity}` +
      (p.kind === "setter" ? " (setter)" : ""))
    .join("\n");
}

export function paletteOf(view: SessionView): PaletteEntry[] {
  return palette(view.snapshot);
}
