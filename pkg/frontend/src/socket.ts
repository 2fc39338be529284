// WebSocket client with an automatic reconnect loop; the display greys out
// while the link is down and recovers on its own.

import { parseServerMessage, type HelloMessage, type StateMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "lost";

export interface SocketCallbacks {
  onHello?(msg: HelloMessage): void;
  onState?(msg: StateMessage): void;
  onStatus?(status: ConnectionStatus): void;
}

const RECONNECT_BASE_MS = 500;
const RECONNECT_MAX_MS = 5000;

export class ConsoleSocket {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private closed = false;

  constructor(private url: string, private callbacks: SocketCallbacks) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  send(message: object): void {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(message));
    }
  }

  private open(): void {
    this.callbacks.onStatus?.("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.attempts = 0;
      this.callbacks.onStatus?.("open");
    };
    this.ws.onmessage = (event) => {
      const msg = parseServerMessage(String(event.data));
      if (msg === null) return;
      if (msg.type === "hello") this.callbacks.onHello?.(msg);
      else this.callbacks.onState?.(msg);
    };
    this.ws.onclose = () => {
      this.callbacks.onStatus?.("lost");
      if (!this.closed) {
        const backoff = Math.min(RECONNECT_BASE_MS * 2 ** this.attempts, RECONNECT_MAX_MS);
        this.attempts += 1;
        setTimeout(() => this.open(), backoff);
      }
    };
  }
}
