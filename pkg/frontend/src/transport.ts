/** Message transport: a thin seam over the session WebSocket so the whole
 * client stack runs against a fake in tests. */

import { ClientMessage, ServerMessage, parseServerMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface Transport {
  readonly status: ConnectionStatus;
  send(msg: ClientMessage): void;
  onMessage(handler: (msg: ServerMessage) => void): void;
  onStatus(handler: (status: ConnectionStatus) => void): void;
  close(): void;
}

/** Browser WebSocket transport for `/sessions/{id}/ws`. */
export class WsTransport implements Transport {
  status: ConnectionStatus = "connecting";
  private ws: WebSocket;
  private messageHandlers: Array<(msg: ServerMessage) => void> = [];
  private statusHandlers: Array<(status: ConnectionStatus) => void> = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => this.setStatus("open");
    this.ws.onclose = () => this.setStatus("closed");
    this.ws.onerror = () => this.setStatus("closed");
    this.ws.onmessage = (ev: MessageEvent) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) this.messageHandlers.forEach((h) => h(msg));
    };
  }

  private setStatus(s: ConnectionStatus): void {
    this.status = s;
    this.statusHandlers.forEach((h) => h(s));
  }

  send(msg: ClientMessage): void {
    if (this.status === "open") this.ws.send(JSON.stringify(msg));
  }

  onMessage(handler: (msg: ServerMessage) => void): void {
    this.messageHandlers.push(handler);
  }

  onStatus(handler: (status: ConnectionStatus) => void): void {
    this.statusHandlers.push(handler);
  }

  close(): void {
    this.ws.close();
  }
}

/** In-memory transport: tests push server messages and inspect sent ones. */
export class FakeTransport implements Transport {
  status: ConnectionStatus = "open";
  sent: ClientMessage[] = [];
  private messageHandlers: Array<(msg: ServerMessage) => void> = [];
  private statusHandlers: Array<(status: ConnectionStatus) => void> = [];

  send(msg: ClientMessage): void {
    if (this.status === "open") this.sent.push(msg);
  }

  onMessage(handler: (msg: ServerMessage) => void): void {
    this.messageHandlers.push(handler);
  }

  onStatus(handler: (status: ConnectionStatus) => void): void {
    this.statusHandlers.push(handler);
  }

  close(): void {
    this.setStatus("closed");
  }

  /** Test hook: deliver a server message to the client. */
  push(msg: ServerMessage): void {
    this.messageHandlers.forEach((h) => h(msg));
  }

  /** Test hook: drive the connection status. */
  setStatus(s: ConnectionStatus): void {
    this.status = s;
    this.statusHandlers.forEach((h) => h(s));
  }
}
