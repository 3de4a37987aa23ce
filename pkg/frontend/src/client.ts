/**
 * NDJSON client for the engine serve protocol.
 *
 * Two transports: spawn the engine as a child process and talk over its
 * stdio, or connect to a local TCP port. One command is in flight at a
 * time, matching the engine's one-command contract; delta pushes arrive
 * between responses and are fanned out to subscribers.
 */

import { ChildProcess, spawn } from "node:child_process";
import { createConnection, Socket } from "node:net";
import { DeltaPush, Request, Response, ServerMessage, isDelta } from "./types.js";

export type Endpoint =
  | { kind: "spawn"; command: string[] }
  | { kind: "tcp"; port: number; host?: string };

type Listener = (msg: DeltaPush) => void;
type CloseListener = () => void;

export class EngineClient {
  private child: ChildProcess | null = null;
  private socket: Socket | null = null;
  private buffer = "";
  private pending: ((resp: Response) => void)[] = [];
  private listeners: Listener[] = [];
  private closeListeners: CloseListener[] = [];
  private inFlight = false;
  closed = false;

  static async connect(endpoint: Endpoint): Promise<EngineClient> {
    const client = new EngineClient();
    if (endpoint.kind === "spawn") {
      const [cmd, ...args] = endpoint.command;
      client.child = spawn(cmd, args, { stdio: ["pipe", "pipe", "inherit"] });
      client.child.stdout!.setEncoding("utf-8");
      client.child.stdout!.on("data", (chunk: string) => client.feed(chunk));
      client.child.on("close", () => client.handleClose());
      return client;
    }
    const socket = createConnection({
      port: endpoint.port,
      host: endpoint.host ?? "127.0.0.1",
    });
    await new Promise<void>((resolve, reject) => {
      socket.once("connect", () => resolve());
      socket.once("error", (err) => reject(err));
    });
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => client.feed(chunk));
    socket.on("close", () => client.handleClose());
    client.socket = socket;
    return client;
  }

  onDelta(listener: Listener): void {
    this.listeners.push(listener);
  }

  onClose(listener: CloseListener): void {
    this.closeListeners.push(listener);
  }

  /** Send one request; resolves with its response. Rejects if busy. */
  send(request: Request): Promise<Response> {
    if (this.closed) {
      return Promise.reject(new Error("connection closed"));
    }
    if (this.inFlight) {
      return Promise.reject(new Error("a command is already in flight"));
    }
    this.inFlight = true;
    const line = JSON.stringify(request) + "\n";
    return new Promise<Response>((resolve, reject) => {
      this.pending.push((resp) => {
        this.inFlight = false;
        resolve(resp);
      });
      const sink = this.child ? this.child.stdin! : this.socket!;
      sink.write(line, (err) => {
        if (err) {
          this.inFlight = false;
          this.pending.pop();
          reject(err);
        }
      });
    });
  }

  close(): void {
    if (this.child) {
      this.child.stdin?.end();
      this.child.kill();
    }
    this.socket?.end();
  }

  private feed(chunk: string): void {
    this.buffer += chunk;
    let index;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).trim();
      this.buffer = this.buffer.slice(index + 1);
      if (!line) continue;
      let message: ServerMessage;
      try {
        message = JSON.parse(line) as ServerMessage;
      } catch {
        continue; // not ours to interpret
      }
      if (isDelta(message)) {
        for (const listener of this.listeners) listener(message);
      } else {
        const waiter = this.pending.shift();
        if (waiter) waiter(message);
      }
    }
  }

  private handleClose(): void {
    this.closed = true;
    while (this.pending.length) {
      this.pending.shift()!({ ok: false, error: "connection closed" });
    }
    for (const listener of this.closeListeners) listener();
  }
}
