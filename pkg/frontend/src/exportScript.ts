/**
 * Export the commands issued in a session as a batch script (.rxs),
 * replayable through the engine's run mode.
 */

import { JsonValue } from "./types.js";

export type IssuedCommand =
  | { kind: "inject"; src: string; dst: string; event: string; args: JsonValue[] }
  | { kind: "tick"; ms: number };

function literal(v: JsonValue): string {
  if (typeof v === "object" && v !== null) {
    return v.ref === null ? "null" : v.ref;
  }
  if (typeof v === "string") {
    return JSON.stringify(v);
  }
  return String(v);
}

function duration(ms: number): string {
  if (ms > 0 && ms % 1000 === 0) return `${ms / 1000}s`;
  return `${ms}ms`;
}

export function exportScript(commands: IssuedCommand[]): string {
  const lines: string[] = [];
  for (const cmd of commands) {
    if (cmd.kind === "inject") {
      const args = cmd.args.length
        ? `(${cmd.args.map(literal).join(", ")})`
        : "";
      lines.push(`inject ${cmd.src} ${cmd.dst}.${cmd.event}${args};`);
    } else {
      lines.push(`tick ${duration(cmd.ms)};`);
    }
  }
  return lines.map((l) => l + "\n").join("");
}
