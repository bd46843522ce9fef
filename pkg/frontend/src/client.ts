/**
 * Reconnecting client for the engine's control socket.
 *
 * Transport is pluggable: node's net.Socket for the desk console and the
 * integration tests, a WebSocket shim in the browser build. The client
 * owns line framing, schema validation both ways, and reconnect with
 * capped exponential backoff (1 s doubling to 15 s).
 */

import { ClientMessage, ServerMessage, encodeClientMessage, parseServerLine } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface TransportHooks {
  onData(chunk: string): void;
  onOpen(): void;
  onClose(): void;
}

export interface Transport {
  send(data: string): void;
  close(): void;
}

export type TransportFactory = (hooks: TransportHooks) => Transport;

export interface ClientOptions {
  backoffMs?: number;
  maxBackoffMs?: number;
  /** injectable for tests */
  schedule?: (fn: () => void, delayMs: number) => unknown;
}

export class ConsoleClient {
  private transport: Transport | null = null;
  private buffer = "";
  private closed = false;
  private backoffMs: number;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly schedule: (fn: () => void, delayMs: number) => unknown;

  /** inbound messages that failed schema validation, skipped not fatal */
  malformedCount = 0;
  status: ConnectionStatus = "disconnected";

  onMessage: (msg: ServerMessage) => void = () => {};
  onStatus: (status: ConnectionStatus) => void = () => {};

  constructor(private readonly factory: TransportFactory, options: ClientOptions = {}) {
    this.initialBackoffMs = options.backoffMs ?? 1000;
    this.maxBackoffMs = options.maxBackoffMs ?? 15000;
    this.backoffMs = this.initialBackoffMs;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  connect(): void {
    this.closed = false;
    this.setStatus("connecting");
    this.transport = this.factory({
      onData: (chunk) => this.feed(chunk),
      onOpen: () => {
        this.backoffMs = this.initialBackoffMs;
        this.setStatus("connected");
      },
      onClose: () => {
        this.transport = null;
        this.setStatus("disconnected");
        if (!this.closed) {
          const delay = this.backoffMs;
          this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
          this.schedule(() => {
            if (!this.closed) this.connect();
          }, delay);
        }
      },
    });
  }

  /** Validates and sends; throws on a message that violates the schema. */
  send(msg: ClientMessage): void {
    const line = encodeClientMessage(msg);
    if (!this.transport || this.status !== "connected") {
      throw new Error("not connected");
    }
    this.transport.send(line);
  }

  close(): void {
    this.closed = true;
    this.transport?.close();
    this.transport = null;
    this.setStatus("disconnected");
  }

  private feed(chunk: string): void {
    this.buffer += chunk;
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) return;
      const line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (!line.trim()) continue;
      const msg = parseServerLine(line);
      if (msg === null) {
        this.malformedCount += 1; // logged and skipped; panel stays live
        continue;
      }
      this.onMessage(msg);
    }
  }

  private setStatus(status: ConnectionStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.onStatus(status);
    }
  }
}

/** TCP transport for node environments (desk console, tests). */
export function tcpTransport(host: string, port: number): TransportFactory {
  return (hooks) => {
    // deferred import keeps the module loadable in a browser bundle
    import("node:net").then(
      (net) => {
        const socket = net.createConnection({ host, port });
        socket.setEncoding("utf8");
        socket.on("connect", hooks.onOpen);
        socket.on("data", (chunk: string) => hooks.onData(chunk));
        socket.on("error", () => {});
        socket.on("close", hooks.onClose);
        current.socket = socket;
        if (current.closed) socket.destroy();
        for (const pending of current.queue.splice(0)) socket.write(pending);
      },
      () => hooks.onClose(),
    );
    const current: {
      socket: import("node:net").Socket | null;
      closed: boolean;
      queue: string[];
    } = { socket: null, closed: false, queue: [] };
    return {
      send(data: string) {
        if (current.socket) current.socket.write(data);
        else current.queue.push(data);
      },
      close() {
        current.closed = true;
        current.socket?.destroy();
      },
    };
  };
}
