/** Session client: one WebSocket to the service, plus the frame ticker.
 *
 * Frames are emitted at a fixed rate from the current control values whether
 * or not they changed; quiescence detection is the server's job. Session
 * time is monotone and starts at 0 when the socket opens.
 */

import type { VisitorControls } from "./controls.js";
import { controlsToPerson } from "./controls.js";
import type { ClientMessage, ServerMessage } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

/** The subset of the WebSocket API the client needs (ws and browser both fit). */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionCallbacks {
  onMessage?: (msg: ServerMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
  onSocketError?: (detail: string) => void;
}

export const DEFAULT_TICK_HZ = 5;

export class SessionClient {
  private socket: SocketLike | null = null;
  private ticker: ReturnType<typeof setInterval> | null = null;
  private startedAt = 0;
  private lastTime = 0;
  readonly url: string;

  constructor(
    serviceBaseUrl: string,
    private callbacks: SessionCallbacks = {},
    private socketFactory: SocketFactory = (url) => new WebSocket(url) as unknown as SocketLike,
    private now: () => number = () => performance.now(),
  ) {
    this.url = serviceBaseUrl.replace(/^http/, "ws").replace(/\/$/, "") + "/session";
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = this.socketFactory(this.url);
      this.socket = socket;
      socket.onopen = () => {
        this.startedAt = this.now();
        this.lastTime = 0;
        this.callbacks.onOpen?.();
        resolve();
      };
      socket.onerror = () => {
        this.callbacks.onSocketError?.("connection failed");
        reject(new Error(`cannot connect to ${this.url}`));
      };
      socket.onclose = () => {
        this.stopTicker();
        this.socket = null;
        this.callbacks.onClose?.();
      };
      socket.onmessage = (ev) => {
        let msg: ServerMessage;
        try {
          msg = parseServerMessage(String(ev.data));
        } catch (e) {
          this.callbacks.onSocketError?.(`unparseable server message: ${e}`);
          return;
        }
        this.callbacks.onMessage?.(msg);
      };
    });
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  private send(msg: ClientMessage): void {
    if (!this.socket) {
      throw new Error("session is not connected");
    }
    this.socket.send(JSON.stringify(msg));
  }

  loadPersona(name: string): void {
    this.send({ type: "load_persona", name });
  }

  reset(): void {
    this.send({ type: "reset" });
  }

  /** Session-relative seconds, never decreasing (the server rejects reversals). */
  sessionTime(): number {
    const t = (this.now() - this.startedAt) / 1000;
    this.lastTime = Math.max(this.lastTime, t);
    return this.lastTime;
  }

  sendFrame(controls: VisitorControls): void {
    this.send({
      type: "frame",
      time: this.sessionTime(),
      persons: [controlsToPerson(controls)],
    });
  }

  startTicker(getControls: () => VisitorControls, hz: number = DEFAULT_TICK_HZ): void {
    this.stopTicker();
    this.ticker = setInterval(() => {
      if (this.socket) {
        this.sendFrame(getControls());
      }
    }, 1000 / hz);
  }

  stopTicker(): void {
    if (this.ticker !== null) {
      clearInterval(this.ticker);
      this.ticker = null;
    }
  }

  close(): void {
    this.stopTicker();
    this.socket?.close();
    this.socket = null;
  }
}
