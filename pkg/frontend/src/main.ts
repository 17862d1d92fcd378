/**
 * Page bootstrap. Query parameters pick the service and scene:
 *   ?api=http://127.0.0.1:8000&scene=demo
 */

import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { bindDom } from "./dom.js";

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const sceneId = params.get("scene") ?? "demo";

  const canvas = document.getElementById("scene-canvas") as HTMLCanvasElement;
  const api = new ApiClient(base);
  try {
    const controller = await Controller.open(api, sceneId, canvas.width, canvas.height);
    bindDom(controller);
  } catch (err) {
    const banner = document.getElementById("status-line")!;
    banner.textContent =
      `Could not reach ${base} (scene '${sceneId}'): ` +
      (err instanceof Error ? err.message : String(err));
  }
}

void start();
