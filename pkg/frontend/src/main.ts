/**
 * Interactive play-out console. The human is the environment: inject
 * declared events, advance the clock, watch machines, chart cuts,
 * violations, and the trace evolve.
 *
 * Usage:
 *   node dist/main.js --spawn "python3 -m rxm serve --model model.rxm"
 *   node dist/main.js --port 8137
 */

import * as fs from "node:fs";
import * as readline from "node:readline";
import { Endpoint } from "./client.js";
import { SessionController } from "./controller.js";
import { entryLine, renderPalette, renderView } from "./render.js";
import { JsonValue } from "./types.js";
import { palette } from "./view.js";

const USAGE = `commands:
  show                         render the full session view
  list                         list injectable environment events
  inject <n> [args...]         inject palette entry n (args: int, "str",
                               true/false, @objectId, null)
  inject <src> <dst>.<ev> [args...]   inject explicitly
  tick <ms>                    advance the logical clock
  reset                        fresh run
  export <file.rxs>            save the session as a batch script
  quit`;

function parseArgValue(token: string): JsonValue {
  if (token === "true") return true;
  if (token === "false") return false;
  if (token === "null") return { ref: null };
  if (token.startsWith("@")) return { ref: token.slice(1) };
  if (/^-?\d+$/.test(token)) return Number(token);
  if (token.startsWith('"') && token.endsWith('"')) {
    return JSON.parse(token) as string;
  }
  return token;
}

function parseEndpoint(argv: string[]): Endpoint {
  const spawnIdx = argv.indexOf("--spawn");
  if (spawnIdx >= 0 && argv[spawnIdx + 1]) {
    return { kind: "spawn", command: argv[spawnIdx + 1].split(/\s+/) };
  }
  const portIdx = argv.indexOf("--port");
  if (portIdx >= 0 && argv[portIdx + 1]) {
    return { kind: "tcp", port: Number(argv[portIdx + 1]) };
  }
  console.error("need --spawn \"<engine command>\" or --port <n>");
  process.exit(2);
}

async function runOnce(controller: SessionController, endpoint: Endpoint,
                       retries = 3): Promise<void> {
  for (let attempt = 1; ; attempt++) {
    try {
      await controller.connect(endpoint);
      return;
    } catch (err) {
      console.error(`connection failed (attempt ${attempt}): ${err}`);
      if (attempt >= retries) throw err;
      await new Promise((r) => setTimeout(r, 500 * attempt));
    }
  }
}

async function main(): Promise<void> {
  const endpoint = parseEndpoint(process.argv.slice(2));
  const controller = new SessionController();
  await runOnce(controller, endpoint);
  console.log(renderView(controller.view));
  console.log("\nready; 'help' lists commands");

  const rl = readline.createInterface({ input: process.stdin,
                                        output: process.stdout,
                                        prompt: "rxm> " });
  rl.prompt();
  // async iteration processes commands strictly one at a time, matching
  // the engine's one-in-flight contract even when input is piped
  for await (const raw of rl) {
    const line = raw.trim();
    if (!line) { rl.prompt(); continue; }
    const [head, ...rest] = line.split(/\s+/);
    try {
      if (head === "quit" || head === "exit") {
        break;
      } else if (head === "help") {
        console.log(USAGE);
      } else if (head === "show") {
        console.log(renderView(controller.view));
      } else if (head === "list") {
        console.log(renderPalette(palette(controller.view.snapshot)));
      } else if (head === "tick") {
        const resp = await controller.tick(Number(rest[0] ?? "0"));
        reportEntries(resp);
      } else if (head === "reset") {
        await controller.reset();
        console.log("reset; fresh snapshot loaded");
      } else if (head === "export") {
        const path = rest[0] ?? "session.rxs";
        fs.writeFileSync(path, controller.exportScript());
        console.log(`wrote ${path}`);
      } else if (head === "inject") {
        await handleInject(controller, rest);
      } else {
        console.log(USAGE);
      }
    } catch (err) {
      console.error(`error: ${err}`);
    }
    rl.prompt();
  }
  controller.close();
  rl.close();
  process.exit(0);
}

function reportEntries(resp: { ok: boolean; entries?: unknown[] } | any): void {
  if (!resp.ok) {
    console.log(`engine error: ${resp.error}`);
    return;
  }
  const entries = resp.entries ?? [];
  if (!entries.length) {
    console.log("quiescent (no entries)");
    return;
  }
  for (const entry of entries) console.log("  " + entryLine(entry));
}

async function handleInject(controller: SessionController,
                             rest: string[]): Promise<void> {
  if (!rest.length) {
    console.log(USAGE);
    return;
  }
  let src = "env";
  let dst = "";
  let event = "";
  let argTokens: string[] = [];
  if (/^\d+$/.test(rest[0])) {
    const entries = palette(controller.view.snapshot);
    const pick = entries[Number(rest[0])];
    if (!pick) {
      console.log(`no palette entry ${rest[0]}; try 'list'`);
      return;
    }
    dst = pick.object;
    event = pick.event;
    argTokens = rest.slice(1);
  } else {
    const dotted = rest[1] ?? "";
    const dot = dotted.indexOf(".");
    if (dot < 0) {
      console.log(USAGE);
      return;
    }
    src = rest[0];
    dst = dotted.slice(0, dot);
    event = dotted.slice(dot + 1);
    argTokens = rest.slice(2);
  }
  const resp = await controller.inject(src, dst, event,
                                       argTokens.map(parseArgValue));
  reportEntries(resp);
}

void main();
