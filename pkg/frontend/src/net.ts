/**
 * Socket client: owns the connection, folds server messages into the
 * view, and paces input upstream.
 *
 * Input pacing: at most one input message per server tick.  Each
 * snapshot marks a tick boundary; the client then sends the current
 * intent if it differs from what the server already holds (move and
 * stance persist server-side) or if an action is queued.  Actions
 * latch until sent, latest wins.  While disconnected everything is
 * dropped and the socket redials with doubling backoff; on open the
 * client says hello again and re-asserts its overlay toggles, since a
 * fresh server session starts with all of them off.
 */

import { Intent } from "./input.js";
import {
  Action,
  ClientMessage,
  ControlMsg,
  InputMsg,
  Stance,
  control,
  hello,
  input,
  parseServer,
  setOverlay,
} from "./protocol.js";
import { ViewState, applyServer } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, ms: number) => void;

const RETRY_START_MS = 500;
const RETRY_CAP_MS = 5000;

/** Decides, once per tick, whether an input frame is worth sending. */
export class InputSender {
  private lastTick: number | null = null;
  private sentMove: [number, number] = [0, 0];
  private sentStance: Stance = "walk";
  private action: Action | null = null;

  /** Latch a one-shot action for the next input; latest wins. */
  queueAction(action: Action): void {
    this.action = action;
  }

  /** Forget session state: the server holds a fresh default input. */
  sessionReset(): void {
    this.lastTick = null;
    this.sentMove = [0, 0];
    this.sentStance = "walk";
    this.action = null;
  }

  /** Input message for this tick's snapshot, or null to stay quiet. */
  onTick(tick: number, intent: Intent): InputMsg | null {
    if (tick === this.lastTick) {
      return null;
    }
    const moved =
      intent.move[0] !== this.sentMove[0] || intent.move[1] !== this.sentMove[1];
    if (!moved && intent.stance === this.sentStance && this.action === null) {
      return null;
    }
    this.lastTick = tick;
    const msg = input(tick, intent.move, intent.stance, this.action ?? undefined);
    this.action = null;
    this.sentMove = [intent.move[0], intent.move[1]];
    this.sentStance = intent.stance;
    return msg;
  }
}

export class Client {
  readonly sender = new InputSender();
  private sock: SocketLike | null = null;
  private retryMs = RETRY_START_MS;
  private readonly factory: SocketFactory;
  private readonly schedule: Scheduler;

  constructor(
    private readonly url: string,
    private readonly view: ViewState,
    private readonly intentNow: () => Intent,
    opts: { factory?: SocketFactory; schedule?: Scheduler } = {},
  ) {
    this.factory =
      opts.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule =
      opts.schedule ??
      ((fn, ms) => {
        setTimeout(fn, ms);
      });
  }

  connect(): void {
    this.view.connection = "connecting";
    const sock = this.factory(this.url);
    this.sock = sock;
    sock.onopen = () => {
      this.view.connection = "open";
      this.retryMs = RETRY_START_MS;
      this.sender.sessionReset();
      this.send(hello());
      const t = this.view.toggles;
      if (t.cones || t.posts || t.canvass || t.follow) {
        this.send(setOverlay(t));
      }
    };
    sock.onmessage = (ev) => this.onMessage(ev.data);
    sock.onclose = () => {
      if (this.sock !== sock) {
        return;
      }
      this.sock = null;
      this.view.connection = "closed";
      this.schedule(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, RETRY_CAP_MS);
    };
  }

  private onMessage(raw: string): void {
    const msg = parseServer(raw);
    if (!msg) {
      return;
    }
    applyServer(this.view, msg);
    if (msg.type === "meta") {
      // hello reply or reset: the server-side input box is back at defaults
      this.sender.sessionReset();
    } else if (msg.type === "snapshot") {
      const out = this.sender.onTick(msg.tick, this.intentNow());
      if (out) {
        this.send(out);
      }
    }
  }

  /** Queue an action for the next input frame; dropped while offline. */
  queueAction(action: Action): void {
    if (this.view.connection === "open") {
      this.sender.queueAction(action);
    }
  }

  sendControl(cmd: ControlMsg["cmd"], seed?: number): void {
    this.send(control(cmd, seed));
  }

  sendOverlay(): void {
    this.send(setOverlay(this.view.toggles));
  }

  private send(msg: ClientMessage): void {
    if (this.view.connection !== "open" || !this.sock) {
      return;
    }
    this.sock.send(JSON.stringify(msg));
  }
}
