/**
 * Session controller: one engine connection, one view, a command log.
 * The interactive front end and the tests both drive sessions through
 * this class; it owns no semantics, only plumbing.
 */

import { EngineClient, Endpoint } from "./client.js";
import { IssuedCommand, exportScript } from "./exportScript.js";
import { JsonValue, Response } from "./types.js";
import {
  SessionView,
  applyMessage,
  clearedView,
  emptyView,
  withStatus,
} from "./view.js";

export class SessionController {
  view: SessionView = emptyView();
  readonly commands: IssuedCommand[] = [];
  private client: EngineClient | null = null;

  async connect(endpoint: Endpoint): Promise<void> {
    this.view = withStatus(this.view, "connecting");
    const client = await EngineClient.connect(endpoint);
    client.onDelta((delta) => {
      this.view = applyMessage(this.view, delta);
    });
    client.onClose(() => {
      this.view = withStatus(this.view, "disconnected");
    });
    this.client = client;
    this.view = withStatus(this.view, "connected");
    await this.refreshSnapshot();
  }

  private ensure(): EngineClient {
    if (!this.client || this.client.closed) {
      throw new Error("not connected");
    }
    return this.client;
  }

  async refreshSnapshot(): Promise<Response> {
    const resp = await this.ensure().send({ cmd: "snapshot" });
    this.view = applyMessage(this.view, resp);
    return resp;
  }

  async inject(src: string, dst: string, event: string,
               args: JsonValue[]): Promise<Response> {
    const resp = await this.ensure().send({ cmd: "inject", src, dst, event, args });
    this.view = applyMessage(this.view, resp);
    if (resp.ok) {
      this.commands.push({ kind: "inject", src, dst, event, args });
    }
    return resp;
  }

  async tick(ms: number): Promise<Response> {
    const resp = await this.ensure().send({ cmd: "tick", ms });
    this.view = applyMessage(this.view, resp);
    if (resp.ok) {
      this.commands.push({ kind: "tick", ms });
    }
    return resp;
  }

  async reset(): Promise<Response> {
    const resp = await this.ensure().send({ cmd: "reset" });
    if (resp.ok) {
      this.view = clearedView(this.view);
      this.commands.length = 0;
      await this.refreshSnapshot();
    } else {
      this.view = applyMessage(this.view, resp);
    }
    return resp;
  }

  exportScript(): string {
    return exportScript(this.commands);
  }

  close(): void {
    this.client?.close();
  }
}
