// Top-down orthographic view: world x grows right, world y grows up the
// screen, so the vertical axis flips. scale is pixels per metre; offsetX/Y
// is where the world origin lands on the canvas.

import type { ObjectDoc } from "./types.js";

export interface Viewport {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const MIN_SCALE = 4;
export const MAX_SCALE = 2000;

export function worldToScreen(v: Viewport, x: number, y: number): { x: number; y: number } {
  return { x: v.offsetX + x * v.scale, y: v.offsetY - y * v.scale };
}

export function screenToWorld(v: Viewport, px: number, py: number): { x: number; y: number } {
  return { x: (px - v.offsetX) / v.scale, y: (v.offsetY - py) / v.scale };
}

export function panBy(v: Viewport, dxPx: number, dyPx: number): Viewport {
  return { scale: v.scale, offsetX: v.offsetX + dxPx, offsetY: v.offsetY + dyPx };
}

/** Zoom by `factor`, keeping the world point under (px, py) fixed on screen. */
export function zoomAt(v: Viewport, px: number, py: number, factor: number): Viewport {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, v.scale * factor));
  const anchor = screenToWorld(v, px, py);
  return {
    scale,
    offsetX: px - anchor.x * scale,
    offsetY: py + anchor.y * scale,
  };
}

/** A viewport that frames every object footprint with `margin` px to spare. */
export function fitSceneViewport(
  objects: ObjectDoc[],
  width: number,
  height: number,
  margin = 24,
): Viewport {
  if (objects.length === 0) {
    return { scale: 50, offsetX: width / 2, offsetY: height / 2 };
  }
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const o of objects) {
    minX = Math.min(minX, o.centroid[0] - o.half_extents[0]);
    maxX = Math.max(maxX, o.centroid[0] + o.half_extents[0]);
    minY = Math.min(minY, o.centroid[1] - o.half_extents[1]);
    maxY = Math.max(maxY, o.centroid[1] + o.half_extents[1]);
  }
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min(
    MAX_SCALE,
    Math.max(MIN_SCALE, Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY)),
  );
  return {
    scale,
    offsetX: width / 2 - ((minX + maxX) / 2) * scale,
    offsetY: height / 2 + ((minY + maxY) / 2) * scale,
  };
}

/**
 * The node whose footprint contains the world point, picking the one with
 * the highest top face when boxes stack (that is what the eye sees from
 * above); ties break toward the lowest id. Null when the point is floor.
 */
export function pickObject(objects: ObjectDoc[], wx: number, wy: number): number | null {
  let best: ObjectDoc | null = null;
  let bestTop = -Infinity;
  for (const o of objects) {
    if (Math.abs(wx - o.centroid[0]) > o.half_extents[0]) continue;
    if (Math.abs(wy - o.centroid[1]) > o.half_extents[1]) continue;
    const top = o.centroid[2] + o.half_extents[2];
    if (top > bestTop || (top === bestTop && best !== null && o.id < best.id)) {
      best = o;
      bestTop = top;
    }
  }
  return best === null ? null : best.id;
}
