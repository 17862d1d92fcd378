/**
 * Thin fetch client for the scene alignment service. One method per
 * endpoint; errors surface as ApiError with the HTTP status and the
 * service's `detail` text.
 */

import type {
  GraphResponse,
  MarkResponse,
  MessageResponse,
  MetricsResponse,
  SessionInfo,
  ToolInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText || `HTTP ${res.status}`;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(this.baseUrl + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await detailOf(res));
    }
    return (await res.json()) as T;
  }

  listTools(): Promise<ToolInfo[]> {
    return this.request("GET", "/tools");
  }

  sceneGraph(sceneId: string): Promise<GraphResponse> {
    return this.request("GET", `/scenes/${encodeURIComponent(sceneId)}/graph`);
  }

  createSession(sceneId: string): Promise<SessionInfo> {
    return this.request("POST", `/scenes/${encodeURIComponent(sceneId)}/sessions`);
  }

  sessionGraph(sessionId: string): Promise<GraphResponse> {
    return this.request("GET", `/sessions/${sessionId}/graph`);
  }

  setViewer(sessionId: string, position: [number, number, number], yaw: number) {
    return this.request("POST", `/sessions/${sessionId}/viewer`, { position, yaw });
  }

  markObject(sessionId: string, objectId: number): Promise<MarkResponse> {
    return this.request("POST", `/sessions/${sessionId}/mark`, { object_id: objectId });
  }

  markPoint(sessionId: string, point: [number, number, number]): Promise<MarkResponse> {
    return this.request("POST", `/sessions/${sessionId}/mark`, { point });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request("POST", `/sessions/${sessionId}/message`, { text });
  }

  rate(sessionId: string, interactionId: string, reasonable: boolean): Promise<{ recorded: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/rate`, {
      interaction_id: interactionId,
      reasonable,
    });
  }

  metrics(sessionId: string): Promise<MetricsResponse> {
    return this.request("GET", `/sessions/${sessionId}/metrics`);
  }
}
