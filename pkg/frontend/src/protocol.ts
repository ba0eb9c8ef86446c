/**
 * Wire protocol types and codecs for the live-session socket.
 *
 * Every message in either direction is a single JSON text frame with a
 * "type" field.  The shapes here mirror the server exactly; field names
 * are part of the contract, so the encoders below are the only place
 * client messages get built.
 */

export type Stance = "walk" | "sneak" | "sprint";

/** [x, y, heading]; heading 0 points +x, pi/2 points +y. */
export type Pose = [number, number, number];

export type Action =
  | { type: "throw_brick"; target: [number, number] }
  | { type: "attack"; target: number };

// -- client to server -------------------------------------------------

export interface HelloMsg {
  type: "hello";
}

export interface InputMsg {
  type: "input";
  tick: number;
  move: [number, number];
  stance: Stance;
  action?: Action;
}

export interface ControlMsg {
  type: "control";
  cmd: "pause" | "resume" | "step" | "reset";
  seed?: number;
}

export interface OverlayToggles {
  cones: boolean;
  posts: boolean;
  canvass: boolean;
  follow: boolean;
}

export interface SetOverlayMsg extends OverlayToggles {
  type: "set_overlay";
}

export type ClientMessage = HelloMsg | InputMsg | ControlMsg | SetOverlayMsg;

export function hello(): HelloMsg {
  return { type: "hello" };
}

export function input(
  tick: number,
  move: [number, number],
  stance: Stance,
  action?: Action,
): InputMsg {
  const msg: InputMsg = { type: "input", tick, move, stance };
  if (action) {
    msg.action = action;
  }
  return msg;
}

export function control(cmd: ControlMsg["cmd"], seed?: number): ControlMsg {
  const msg: ControlMsg = { type: "control", cmd };
  if (seed !== undefined) {
    msg.seed = seed;
  }
  return msg;
}

export function setOverlay(toggles: OverlayToggles): SetOverlayMsg {
  return { type: "set_overlay", ...toggles };
}

// -- server to client -------------------------------------------------

export interface MetaMsg {
  type: "meta";
  tick: number;
  map: { width: number; height: number; rows: string[] };
  legend: Record<string, string>;
  agents: { id: number; kind: string }[];
  seed: number;
  tick_rate: number;
}

export interface SnapshotAgent {
  id: number;
  kind: string;
  pose: Pose;
  awareness: string | null;
  skill: string | null;
  alive: boolean;
  stance?: Stance;
}

export interface InverseModel {
  kind: "inverse";
  theta_max: number;
  k: number;
  d_close: number;
  r_max: number;
}

export interface MultiModel {
  kind: "multi";
  cones: { half_angle: number; range: number }[];
}

export type VisionModel = InverseModel | MultiModel;

export interface ConeBlock {
  agent: number;
  pose: Pose;
  model: VisionModel;
}

export interface PostEntry {
  id: number;
  x: number;
  y: number;
  kind: "cover" | "open";
  rating: number;
}

export interface PostsBlock {
  agent: number;
  selector: string;
  threat: [number, number] | null;
  entries: PostEntry[];
}

/** Cell states: "unseen", "seen", "blocked_seen". */
export interface CanvassBlock {
  agent: number;
  cells: [number, number, string][];
  pending: [number, number] | null;
}

export interface FollowCandidate {
  x: number;
  y: number;
  fx: number;
  fy: number;
  stage: "A" | "B" | "C" | "accepted";
  score: number;
}

export interface FollowBlock {
  agent: number;
  candidates: FollowCandidate[];
}

export interface Overlays {
  cones?: ConeBlock[];
  posts?: PostsBlock[];
  canvass?: CanvassBlock[];
  follow?: FollowBlock[];
}

export interface SnapshotMsg {
  type: "snapshot";
  tick: number;
  agents: SnapshotAgent[];
  overlays: Overlays;
}

export interface ErrorMsg {
  type: "error";
  tick: number;
  message: string;
}

export type ServerMessage = MetaMsg | SnapshotMsg | ErrorMsg;

const SERVER_TYPES = new Set(["meta", "snapshot", "error"]);

/** Decode one server frame; null for anything that is not one. */
export function parseServer(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) {
    return null;
  }
  const type = (obj as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
    return null;
  }
  return obj as ServerMessage;
}
