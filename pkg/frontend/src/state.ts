/**
 * Client view state: the latest server messages plus local UI flags.
 *
 * The sim is authoritative; the client renders exactly what the latest
 * snapshot says and never extrapolates between ticks.  A fresh meta
 * (hello reply or reset) invalidates whatever snapshot came before it.
 */

import {
  MetaMsg,
  OverlayToggles,
  ServerMessage,
  SnapshotMsg,
} from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export interface ViewState {
  connection: Connection;
  meta: MetaMsg | null;
  snapshot: SnapshotMsg | null;
  toggles: OverlayToggles;
  paused: boolean;
  lastError: string | null;
}

export function initialView(): ViewState {
  return {
    connection: "connecting",
    meta: null,
    snapshot: null,
    toggles: { cones: false, posts: false, canvass: false, follow: false },
    paused: false,
    lastError: null,
  };
}

/** Fold one server message into the view.  Latest snapshot wins. */
export function applyServer(view: ViewState, msg: ServerMessage): void {
  switch (msg.type) {
    case "meta":
      view.meta = msg;
      view.snapshot = null;
      view.lastError = null;
      break;
    case "snapshot":
      view.snapshot = msg;
      break;
    case "error":
      view.lastError = msg.message;
      break;
  }
}

export type OverlayKey = keyof OverlayToggles;

/** Flip one overlay toggle and return the new full toggle set. */
export function flipToggle(view: ViewState, key: OverlayKey): OverlayToggles {
  view.toggles = { ...view.toggles, [key]: !view.toggles[key] };
  return view.toggles;
}
