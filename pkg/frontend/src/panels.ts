// View-model builders for the scene and graph panels: plain data the DOM
// layer draws without further thought.

import type { GraphDoc } from "./types.js";
import { worldToScreen, type Viewport } from "./projection.js";

export interface SceneRectView {
  id: number;
  label: string;
  x: number;
  y: number;
  width: number;
  height: number;
  selected: boolean;
  highlighted: boolean;
}

/** Screen rectangles in paint order: low boxes first so stacked ones sit on top. */
export function sceneRects(
  graph: GraphDoc,
  viewport: Viewport,
  selectedId: number | null,
  highlightIds: number[],
): SceneRectView[] {
  const highlighted = new Set(highlightIds);
  return graph.objects
    .slice()
    .sort((a, b) => a.centroid[2] + a.half_extents[2] - (b.centroid[2] + b.half_extents[2]))
    .map((o) => {
      const corner = worldToScreen(
        viewport,
        o.centroid[0] - o.half_extents[0],
        o.centroid[1] + o.half_extents[1],
      );
      return {
        id: o.id,
        label: o.label,
        x: corner.x,
        y: corner.y,
        width: 2 * o.half_extents[0] * viewport.scale,
        height: 2 * o.half_extents[1] * viewport.scale,
        selected: o.id === selectedId,
        highlighted: highlighted.has(o.id),
      };
    });
}

export interface NodeRowView {
  id: number;
  label: string;
  detail: string;
}

export function nodeRows(graph: GraphDoc): NodeRowView[] {
  return graph.objects.map((o) => ({
    id: o.id,
    label: o.label,
    detail: Object.entries(o.attributes)
      .map(([category, values]) => `${category}: ${values.join(", ")}`)
      .join("; "),
  }));
}

export function edgeRows(graph: GraphDoc): string[] {
  const labels = new Map(graph.objects.map((o) => [o.id, o.label]));
  return graph.edges.map(
    (e) =>
      `${labels.get(e.subject) ?? "?"} (id: ${e.subject}) ${e.predicate} ` +
      `${labels.get(e.object) ?? "?"} (id: ${e.object})`,
  );
}
