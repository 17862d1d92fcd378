// Single view-state record plus pure reducers. The service owns the graph:
// every graph visible here arrived through applyGraph with its revision,
// never from a local mutation.

import type { GraphDoc, GraphResponse, MessageResponse, StepDoc } from "./types.js";
import type { Viewport } from "./projection.js";

export interface UserTurn {
  kind: "user";
  text: string;
}

export interface AgentTurn {
  kind: "agent";
  interactionId: string;
  text: string;
  status: string;
  steps: StepDoc[];
  stepsExpanded: boolean;
  rating: boolean | null;
}

export interface NoticeTurn {
  kind: "notice";
  text: string;
}

export type Turn = UserTurn | AgentTurn | NoticeTurn;

export interface ViewState {
  sessionId: string;
  sceneId: string;
  viewport: Viewport;
  graph: GraphDoc | null;
  revision: number;
  selectedId: number | null;
  highlightIds: number[];
  transcript: Turn[];
  busy: boolean;
}

export function initialState(sessionId: string, sceneId: string, viewport: Viewport): ViewState {
  return {
    sessionId,
    sceneId,
    viewport,
    graph: null,
    revision: -1,
    selectedId: null,
    highlightIds: [],
    transcript: [],
    busy: false,
  };
}

export function applyGraph(state: ViewState, res: GraphResponse): ViewState {
  const ids = new Set(res.graph.objects.map((o) => o.id));
  const selectedId =
    state.selectedId !== null && ids.has(state.selectedId) ? state.selectedId : null;
  return { ...state, graph: res.graph, revision: res.revision, selectedId };
}

export function applyMark(state: ViewState, objectId: number, summary: string): ViewState {
  return {
    ...state,
    selectedId: objectId,
    transcript: [...state.transcript, { kind: "notice", text: `Marked: ${summary}` }],
  };
}

export function beginMessage(state: ViewState, text: string): ViewState {
  return {
    ...state,
    busy: true,
    transcript: [...state.transcript, { kind: "user", text }],
  };
}

export function applyMessage(state: ViewState, res: MessageResponse): ViewState {
  const turn: AgentTurn = {
    kind: "agent",
    interactionId: res.interaction_id,
    text: res.final_response,
    status: res.status,
    steps: res.steps,
    stepsExpanded: false,
    rating: null,
  };
  return {
    ...state,
    busy: false,
    transcript: [...state.transcript, turn],
    highlightIds: res.highlights.map((h) => h.id),
  };
}

/** True exactly when the response saw a graph the panel has not fetched yet. */
export function needsRefetch(state: ViewState, res: MessageResponse): boolean {
  return res.graph_revision > state.revision;
}

export function applyConflict(state: ViewState): ViewState {
  return {
    ...state,
    busy: false,
    transcript: [
      ...state.transcript,
      { kind: "notice", text: "Another interaction is still running; try again." },
    ],
  };
}

export function applyError(state: ViewState, text: string): ViewState {
  return {
    ...state,
    busy: false,
    transcript: [...state.transcript, { kind: "notice", text }],
  };
}

export function toggleSteps(state: ViewState, interactionId: string): ViewState {
  return {
    ...state,
    transcript: state.transcript.map((t) =>
      t.kind === "agent" && t.interactionId === interactionId
        ? { ...t, stepsExpanded: !t.stepsExpanded }
        : t,
    ),
  };
}

export function applyRating(
  state: ViewState,
  interactionId: string,
  reasonable: boolean,
): ViewState {
  return {
    ...state,
    transcript: state.transcript.map((t) =>
      t.kind === "agent" && t.interactionId === interactionId
        ? { ...t, rating: reasonable }
        : t,
    ),
  };
}

export function setViewport(state: ViewState, viewport: Viewport): ViewState {
  return { ...state, viewport };
}
