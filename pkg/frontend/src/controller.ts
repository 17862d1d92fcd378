/**
 * Glue between the API client and the view state. Every method ends by
 * handing the new state to onChange; the DOM layer re-renders from that
 * and nothing else.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  fitSceneViewport,
  panBy,
  pickObject,
  screenToWorld,
  zoomAt,
  type Viewport,
} from "./projection.js";
import {
  applyConflict,
  applyError,
  applyGraph,
  applyMark,
  applyMessage,
  applyRating,
  beginMessage,
  initialState,
  needsRefetch,
  setViewport,
  toggleSteps,
  type ViewState,
} from "./state.js";

export class Controller {
  state: ViewState;
  onChange: (state: ViewState) => void = () => {};

  private constructor(private api: ApiClient, state: ViewState) {
    this.state = state;
  }

  static async open(
    api: ApiClient,
    sceneId: string,
    width = 800,
    height = 600,
  ): Promise<Controller> {
    const session = await api.createSession(sceneId);
    const graphRes = await api.sessionGraph(session.session_id);
    const viewport = fitSceneViewport(graphRes.graph.objects, width, height);
    const controller = new Controller(
      api,
      initialState(session.session_id, sceneId, viewport),
    );
    controller.commit(applyGraph(controller.state, graphRes));
    return controller;
  }

  private commit(state: ViewState): void {
    this.state = state;
    this.onChange(state);
  }

  async refreshGraph(): Promise<void> {
    const res = await this.api.sessionGraph(this.state.sessionId);
    this.commit(applyGraph(this.state, res));
  }

  /** Click in the scene panel: a box marks its node, the floor marks a point. */
  async clickScene(px: number, py: number): Promise<void> {
    if (this.state.graph === null) return;
    const w = screenToWorld(this.state.viewport, px, py);
    const hit = pickObject(this.state.graph.objects, w.x, w.y);
    await this.mark(
      hit !== null
        ? this.api.markObject(this.state.sessionId, hit)
        : this.api.markPoint(this.state.sessionId, [w.x, w.y, 0]),
    );
  }

  async clickNode(id: number): Promise<void> {
    await this.mark(this.api.markObject(this.state.sessionId, id));
  }

  private async mark(pending: Promise<{ object_id: number; summary: string }>): Promise<void> {
    try {
      const res = await pending;
      this.commit(applyMark(this.state, res.object_id, res.summary));
    } catch (err) {
      this.commit(applyError(this.state, describe(err)));
    }
  }

  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (trimmed === "" || this.state.busy) return;
    this.commit(beginMessage(this.state, trimmed));
    try {
      const res = await this.api.sendMessage(this.state.sessionId, trimmed);
      const refetch = needsRefetch(this.state, res);
      this.commit(applyMessage(this.state, res));
      if (refetch) await this.refreshGraph();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.commit(applyConflict(this.state));
      } else {
        this.commit(applyError(this.state, describe(err)));
      }
    }
  }

  async rate(interactionId: string, reasonable: boolean): Promise<void> {
    try {
      await this.api.rate(this.state.sessionId, interactionId, reasonable);
      this.commit(applyRating(this.state, interactionId, reasonable));
    } catch (err) {
      this.commit(applyError(this.state, describe(err)));
    }
  }

  toggleSteps(interactionId: string): void {
    this.commit(toggleSteps(this.state, interactionId));
  }

  pan(dxPx: number, dyPx: number): void {
    this.commit(setViewport(this.state, panBy(this.state.viewport, dxPx, dyPx)));
  }

  zoom(px: number, py: number, factor: number): void {
    this.commit(setViewport(this.state, zoomAt(this.state.viewport, px, py, factor)));
  }

  setViewportSize(width: number, height: number): void {
    if (this.state.graph === null) return;
    this.commit(
      setViewport(this.state, fitSceneViewport(this.state.graph.objects, width, height)),
    );
  }

  get viewport(): Viewport {
    return this.state.viewport;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `Request failed (${err.status}): ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
