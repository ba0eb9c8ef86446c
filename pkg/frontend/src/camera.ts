/**
 * World/screen transform.
 *
 * World y grows north, screen y grows down, so the camera flips the
 * vertical axis: the map's row 0 sits at the bottom of the canvas and
 * the northward move [0, 1] travels up the screen.
 */

export interface Camera {
  scale: number; // pixels per world unit
  offsetX: number; // screen x of world x = 0
  offsetY: number; // screen y of world y = 0
}

/** Center a width x height world in a canvas, margin in pixels. */
export function fitCamera(
  worldW: number,
  worldH: number,
  canvasW: number,
  canvasH: number,
  margin = 24,
): Camera {
  const usableW = Math.max(1, canvasW - 2 * margin);
  const usableH = Math.max(1, canvasH - 2 * margin);
  const scale = Math.min(usableW / worldW, usableH / worldH);
  return {
    scale,
    offsetX: (canvasW - worldW * scale) / 2,
    offsetY: (canvasH + worldH * scale) / 2,
  };
}

export function worldToScreen(
  cam: Camera,
  x: number,
  y: number,
): [number, number] {
  return [cam.offsetX + x * cam.scale, cam.offsetY - y * cam.scale];
}

export function screenToWorld(
  cam: Camera,
  px: number,
  py: number,
): [number, number] {
  return [(px - cam.offsetX) / cam.scale, (cam.offsetY - py) / cam.scale];
}
