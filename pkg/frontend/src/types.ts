/**
 * Wire types of the engine serve protocol (newline-delimited JSON).
 * The console computes no semantics: everything rendered comes from
 * these messages verbatim.
 */

export type JsonValue = number | string | boolean | { ref: string | null };

export interface TraceEntry {
  seq: number;
  clock: number;
  origin: string; // "env" | "sc:<machine>" | "lsc:<chart>#<copy>" | "timer:<machine>"
  src: string;
  dst: string;
  event: string;
  args: JsonValue[];
  violations: { chart: string; copy: number; kind: string }[];
  quiescent: boolean;
}

export interface MachineSnapshot {
  config: string[];
  vars: Record<string, JsonValue>;
  timers: [string, number, number | null, number, string][];
  initialized: boolean;
  arm_seq: number;
}

export interface CopySnapshot {
  chart: string;
  copy_id: number;
  status: string;
  lifelines: Record<string, string>;
  vars: Record<string, JsonValue>;
  top_pos: Record<string, number>;
  loops: Record<string, unknown>;
  cut: Record<string, number>;
}

export interface ClassDecl {
  props: Record<string, string>;
  signals: [string, number][];
  methods: [string, number][];
  setters: [string, number][];
}

export interface Snapshot {
  clock: number;
  seq: number;
  started: boolean;
  halted: boolean;
  store: Record<string, Record<string, JsonValue>>;
  machines: Record<string, MachineSnapshot>;
  playout: { next_copy_id: number; copies: CopySnapshot[] };
  queue: unknown[];
  obligations: { chart: string; copy: number; messages: string[] }[];
  classes: Record<string, ClassDecl>;
  objects: Record<string, string>;
}

export type Request =
  | { cmd: "inject"; src: string; dst: string; event: string; args: JsonValue[] }
  | { cmd: "tick"; ms: number }
  | { cmd: "snapshot" }
  | { cmd: "reset" };

export type Response =
  | { ok: true; entries?: TraceEntry[]; snapshot?: Snapshot }
  | { ok: false; error: string };

export interface DeltaPush {
  type: "delta";
  entries: TraceEntry[];
  snapshot: Snapshot;
}

export type ServerMessage = Response | DeltaPush;

export function isDelta(msg: ServerMessage): msg is DeltaPush {
  return (msg as DeltaPush).type === "delta";
}
