/**
 * Canvas renderer: map, agents, and the four AI overlays.
 *
 * Everything drawn comes straight from the latest snapshot; the client
 * recomputes no AI quantities.  The one piece of shared math is the
 * inverse-distance cone silhouette, rebuilt here from the model
 * parameters the server ships in the overlay block: the boundary at
 * distance d sits at half_angle(d), so the outline is a wedge that
 * stays at theta_max up close and narrows as k/d further out.
 *
 * Geometry helpers are pure and exported for tests; drawing goes
 * through the structural Draw2D interface so tests can record calls
 * without a real canvas.
 */

import { Camera, worldToScreen } from "./camera.js";
import {
  CanvassBlock,
  ConeBlock,
  FollowBlock,
  InverseModel,
  Pose,
  PostsBlock,
  SnapshotAgent,
  VisionModel,
} from "./protocol.js";
import { ViewState } from "./state.js";

/** The subset of CanvasRenderingContext2D the renderer touches. */
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  save(): void;
  restore(): void;
}

// -- pure geometry -----------------------------------------------------

/** Client mirror of the server's inverse-distance half-angle. */
export function halfAngle(model: InverseModel, d: number): number {
  if (d > model.r_max) {
    return 0;
  }
  if (d <= model.d_close) {
    return model.theta_max;
  }
  return Math.min(model.theta_max, model.k / d);
}

/**
 * Closed cone silhouette in the observer's local frame (+x forward).
 *
 * Apex first, then the upper boundary swept outward with each vertex at
 * +half_angle(d), the far cap arc at r_max, and the lower boundary
 * swept back in at -half_angle(d).
 */
export function inverseConeOutline(
  model: InverseModel,
  steps = 48,
): [number, number][] {
  const pts: [number, number][] = [[0, 0]];
  for (let i = 1; i <= steps; i++) {
    const d = (model.r_max * i) / steps;
    const phi = halfAngle(model, d);
    pts.push([d * Math.cos(phi), d * Math.sin(phi)]);
  }
  const cap = halfAngle(model, model.r_max);
  for (let i = 1; i < steps; i++) {
    const phi = cap - (2 * cap * i) / steps;
    pts.push([model.r_max * Math.cos(phi), model.r_max * Math.sin(phi)]);
  }
  for (let i = steps; i >= 1; i--) {
    const d = (model.r_max * i) / steps;
    const phi = -halfAngle(model, d);
    pts.push([d * Math.cos(phi), d * Math.sin(phi)]);
  }
  return pts;
}

/** Plain fixed-angle wedge, apex first, arc from +half to -half. */
export function wedgeOutline(
  half: number,
  range: number,
  steps = 24,
): [number, number][] {
  const pts: [number, number][] = [[0, 0]];
  for (let i = 0; i <= steps; i++) {
    const phi = half - (2 * half * i) / steps;
    pts.push([range * Math.cos(phi), range * Math.sin(phi)]);
  }
  return pts;
}

/** Local-frame points into world coordinates at the given pose. */
export function transformPoints(
  pts: [number, number][],
  pose: Pose,
): [number, number][] {
  const [ox, oy, h] = pose;
  const c = Math.cos(h);
  const s = Math.sin(h);
  return pts.map(([x, y]) => [ox + x * c - y * s, oy + x * s + y * c]);
}

// -- palette -----------------------------------------------------------

export const KIND_COLORS: Record<string, string> = {
  player: "#e8ecf4",
  buddy: "#56c8f0",
  hunter: "#f0564f",
  runner: "#f09b3e",
  stalker: "#b06fe0",
  clicker: "#9ad45a",
  bloater: "#4f8f5a",
};

export const AWARENESS_GLYPHS: Record<string, string> = {
  suspicious: "?",
  alert: "!",
  searching: "...",
};

export const STAGE_COLORS: Record<string, string> = {
  A: "#f0564f",
  B: "#f09b3e",
  C: "#f0d44f",
  accepted: "#49d07f",
};

export const CANVASS_FILLS: Record<string, string> = {
  unseen: "rgba(86, 140, 240, 0.40)",
  blocked_seen: "rgba(240, 86, 80, 0.18)",
  seen: "rgba(86, 240, 140, 0.08)",
};

const CELL_FILLS: Record<string, string> = {
  "#": "#3a4152",
  "~": "#6a5a3c",
  ".": "#20242e",
};

const BACKGROUND = "#14161c";
const CONE_STROKE = "rgba(240, 210, 90, 0.85)";
const CONE_FILL = "rgba(240, 210, 90, 0.07)";

// -- drawing -----------------------------------------------------------

function tracePoly(ctx: Draw2D, cam: Camera, pts: [number, number][]): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const [px, py] = worldToScreen(cam, x, y);
    if (i === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  });
  ctx.closePath();
}

function fillCell(ctx: Draw2D, cam: Camera, i: number, j: number): void {
  const [px, py] = worldToScreen(cam, i, j + 1);
  ctx.fillRect(px, py, cam.scale + 0.5, cam.scale + 0.5);
}

function drawMap(ctx: Draw2D, cam: Camera, rows: string[]): void {
  rows.forEach((row, j) => {
    for (let i = 0; i < row.length; i++) {
      ctx.fillStyle = CELL_FILLS[row[i]] ?? CELL_FILLS["."];
      fillCell(ctx, cam, i, j);
    }
  });
}

function drawCone(ctx: Draw2D, cam: Camera, block: ConeBlock): void {
  const model: VisionModel = block.model;
  const outlines =
    model.kind === "inverse"
      ? [inverseConeOutline(model)]
      : model.cones.map((c) => wedgeOutline(c.half_angle, c.range));
  for (const outline of outlines) {
    tracePoly(ctx, cam, transformPoints(outline, block.pose));
    ctx.fillStyle = CONE_FILL;
    ctx.fill();
    ctx.strokeStyle = CONE_STROKE;
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

function drawCanvass(ctx: Draw2D, cam: Camera, block: CanvassBlock): void {
  for (const [i, j, state] of block.cells) {
    const fill = CANVASS_FILLS[state];
    if (!fill) {
      continue;
    }
    ctx.fillStyle = fill;
    fillCell(ctx, cam, i, j);
  }
  if (block.pending) {
    const [px, py] = worldToScreen(cam, block.pending[0], block.pending[1]);
    ctx.setLineDash([3, 3]);
    ctx.beginPath();
    ctx.arc(px, py, 0.3 * cam.scale, 0, 2 * Math.PI);
    ctx.strokeStyle = "#f0d44f";
    ctx.lineWidth = 1.5;
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function drawPosts(ctx: Draw2D, cam: Camera, block: PostsBlock): void {
  if (block.threat) {
    const [px, py] = worldToScreen(cam, block.threat[0], block.threat[1]);
    const r = 0.22 * cam.scale;
    ctx.beginPath();
    ctx.moveTo(px - r, py - r);
    ctx.lineTo(px + r, py + r);
    ctx.moveTo(px - r, py + r);
    ctx.lineTo(px + r, py - r);
    ctx.strokeStyle = "#f0564f";
    ctx.lineWidth = 2;
    ctx.stroke();
  }
  ctx.font = "11px ui-monospace, monospace";
  ctx.textAlign = "left";
  ctx.textBaseline = "middle";
  block.entries.forEach((entry, rank) => {
    const [px, py] = worldToScreen(cam, entry.x, entry.y);
    const best = rank === 0;
    const r = (best ? 0.18 : 0.12) * cam.scale;
    const color = best ? "#f0d44f" : "#9aa4b8";
    ctx.beginPath();
    if (entry.kind === "cover") {
      ctx.moveTo(px - r, py - r);
      ctx.lineTo(px + r, py - r);
      ctx.lineTo(px + r, py + r);
      ctx.lineTo(px - r, py + r);
      ctx.closePath();
    } else {
      ctx.arc(px, py, r, 0, 2 * Math.PI);
    }
    ctx.strokeStyle = color;
    ctx.lineWidth = best ? 2 : 1;
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(entry.rating.toFixed(3), px + r + 3, py);
  });
}

function drawFollow(ctx: Draw2D, cam: Camera, block: FollowBlock): void {
  for (const cand of block.candidates) {
    const [px, py] = worldToScreen(cam, cand.x, cand.y);
    const color = STAGE_COLORS[cand.stage] ?? "#9aa4b8";
    if (cand.stage === "accepted") {
      const [fx, fy] = worldToScreen(cam, cand.fx, cand.fy);
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(fx, fy);
      ctx.strokeStyle = color;
      ctx.lineWidth = 1;
      ctx.stroke();
    }
    ctx.beginPath();
    ctx.arc(px, py, (cand.stage === "accepted" ? 0.12 : 0.08) * cam.scale, 0, 2 * Math.PI);
    ctx.fillStyle = color;
    ctx.fill();
  }
}

function drawAgent(ctx: Draw2D, cam: Camera, agent: SnapshotAgent): void {
  const [px, py] = worldToScreen(cam, agent.pose[0], agent.pose[1]);
  const color = KIND_COLORS[agent.kind] ?? "#9aa4b8";
  if (!agent.alive) {
    const r = 0.22 * cam.scale;
    ctx.beginPath();
    ctx.moveTo(px - r, py - r);
    ctx.lineTo(px + r, py + r);
    ctx.moveTo(px - r, py + r);
    ctx.lineTo(px + r, py - r);
    ctx.strokeStyle = "rgba(154, 164, 184, 0.5)";
    ctx.lineWidth = 2;
    ctx.stroke();
    return;
  }
  const body: [number, number][] = [
    [0.38, 0],
    [-0.24, 0.22],
    [-0.24, -0.22],
  ];
  tracePoly(ctx, cam, transformPoints(body, agent.pose));
  ctx.fillStyle = color;
  ctx.fill();
  ctx.textAlign = "center";
  if (agent.awareness && AWARENESS_GLYPHS[agent.awareness]) {
    ctx.font = "bold 13px ui-monospace, monospace";
    ctx.textBaseline = "bottom";
    ctx.fillStyle = "#f0ecd8";
    ctx.fillText(AWARENESS_GLYPHS[agent.awareness], px, py - 0.4 * cam.scale);
  }
  if (agent.skill) {
    ctx.font = "10px ui-monospace, monospace";
    ctx.textBaseline = "top";
    ctx.fillStyle = "rgba(232, 236, 244, 0.75)";
    ctx.fillText(agent.skill, px, py + 0.4 * cam.scale);
  }
  if (agent.stance === "sneak") {
    ctx.beginPath();
    ctx.arc(px, py, 0.5 * cam.scale, 0, 2 * Math.PI);
    ctx.setLineDash([2, 4]);
    ctx.strokeStyle = "rgba(232, 236, 244, 0.6)";
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

/** Draw one full frame of the latest view state. */
export function drawFrame(
  ctx: Draw2D,
  view: ViewState,
  cam: Camera,
  width: number,
  height: number,
): void {
  ctx.save();
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, width, height);
  if (!view.meta) {
    ctx.restore();
    return;
  }
  drawMap(ctx, cam, view.meta.map.rows);
  const snap = view.snapshot;
  if (!snap) {
    ctx.restore();
    return;
  }
  for (const block of snap.overlays.canvass ?? []) {
    drawCanvass(ctx, cam, block);
  }
  for (const block of snap.overlays.cones ?? []) {
    drawCone(ctx, cam, block);
  }
  for (const block of snap.overlays.posts ?? []) {
    drawPosts(ctx, cam, block);
  }
  for (const block of snap.overlays.follow ?? []) {
    drawFollow(ctx, cam, block);
  }
  for (const agent of snap.agents) {
    if (agent.id !== 0) {
      drawAgent(ctx, cam, agent);
    }
  }
  const player = snap.agents.find((a) => a.id === 0);
  if (player) {
    drawAgent(ctx, cam, player);
  }
  ctx.restore();
}
