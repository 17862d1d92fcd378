import { describe, expect, it } from "vitest";

import {
  applyConflict,
  applyGraph,
  applyMark,
  applyMessage,
  applyRating,
  beginMessage,
  initialState,
  needsRefetch,
  toggleSteps,
  type ViewState,
} from "../src/state.js";
import type { GraphResponse, MessageResponse } from "../src/types.js";

function freshState(): ViewState {
  return initialState("s1", "demo", { scale: 100, offsetX: 400, offsetY: 300 });
}

function graphResponse(revision = 0, labels: Record<number, string> = { 5: "book" }): GraphResponse {
  return {
    revision,
    graph: {
      scene_id: "demo",
      objects: Object.entries(labels).map(([id, label]) => ({
        id: Number(id),
        label,
        centroid: [0, 0, 0.5] as [number, number, number],
        half_extents: [0.5, 0.5, 0.5] as [number, number, number],
        attributes: {},
      })),
      edges: [],
    },
  };
}

function messageResponse(overrides: Partial<MessageResponse> = {}): MessageResponse {
  return {
    interaction_id: "i1",
    final_response: "The book (id: 5) is on the blue box.",
    status: "completed",
    steps: [
      {
        index: 1,
        plan: "1. Look.",
        thought: "look",
        action: "query_for_objects",
        action_input: { query: "blue box" },
        observation: "The box (id: 7) ...",
        graph_changed: false,
      },
    ],
    highlights: [{ id: 5, label: "book", centroid: [2.5, 0.9, 0.33] }],
    graph_revision: 0,
    query_ratio: 0.25,
    ...overrides,
  };
}

describe("transcript flow", () => {
  it("gains a user turn on send and an agent turn on response", () => {
    let state = beginMessage(freshState(), "What is on the blue box?");
    expect(state.busy).toBe(true);
    expect(state.transcript).toEqual([{ kind: "user", text: "What is on the blue box?" }]);

    state = applyMessage(state, messageResponse());
    expect(state.busy).toBe(false);
    expect(state.transcript).toHaveLength(2);
    const turn = state.transcript[1];
    expect(turn.kind).toBe("agent");
    if (turn.kind === "agent") {
      expect(turn.text).toBe("The book (id: 5) is on the blue box.");
      expect(turn.stepsExpanded).toBe(false);
      expect(turn.rating).toBeNull();
    }
  });

  it("replaces highlights with the latest response's ids", () => {
    let state = applyMessage(freshState(), messageResponse());
    expect(state.highlightIds).toEqual([5]);
    state = applyMessage(state, messageResponse({ interaction_id: "i2", highlights: [] }));
    expect(state.highlightIds).toEqual([]);
  });

  it("re-enables input with a retry notice on conflict", () => {
    let state = beginMessage(freshState(), "hello");
    state = applyConflict(state);
    expect(state.busy).toBe(false);
    const last = state.transcript[state.transcript.length - 1];
    expect(last.kind).toBe("notice");
    if (last.kind === "notice") expect(last.text).toMatch(/try again/i);
  });

  it("toggles step expansion per interaction", () => {
    let state = applyMessage(freshState(), messageResponse());
    state = toggleSteps(state, "i1");
    const turn = state.transcript[0];
    if (turn.kind === "agent") expect(turn.stepsExpanded).toBe(true);
    state = toggleSteps(state, "i1");
    const again = state.transcript[0];
    if (again.kind === "agent") expect(again.stepsExpanded).toBe(false);
  });

  it("records a rating on the matching turn only", () => {
    let state = applyMessage(freshState(), messageResponse());
    state = applyMessage(state, messageResponse({ interaction_id: "i2" }));
    state = applyRating(state, "i2", false);
    const [first, second] = state.transcript;
    if (first.kind === "agent") expect(first.rating).toBeNull();
    if (second.kind === "agent") expect(second.rating).toBe(false);
  });
});

describe("graph revision tracking", () => {
  it("asks for exactly one refetch when the response's revision is newer", () => {
    let state = applyGraph(freshState(), graphResponse(0));
    const mutated = messageResponse({ graph_revision: 1 });
    expect(needsRefetch(state, mutated)).toBe(true);
    state = applyGraph(state, graphResponse(1, { 5: "sketchbook" }));
    expect(needsRefetch(state, mutated)).toBe(false);
  });

  it("ignores responses at the already-seen revision", () => {
    const state = applyGraph(freshState(), graphResponse(0));
    expect(needsRefetch(state, messageResponse({ graph_revision: 0 }))).toBe(false);
  });

  it("drops the selection when the node vanishes from a fetched graph", () => {
    let state = applyGraph(freshState(), graphResponse(0, { 5: "book", 7: "box" }));
    state = applyMark(state, 7, "The box (id: 7) ...");
    expect(state.selectedId).toBe(7);
    state = applyGraph(state, graphResponse(1, { 5: "book" }));
    expect(state.selectedId).toBeNull();
  });

  it("keeps the selection when the node survives the refetch", () => {
    let state = applyGraph(freshState(), graphResponse(0, { 5: "book" }));
    state = applyMark(state, 5, "The book (id: 5) ...");
    state = applyGraph(state, graphResponse(1, { 5: "sketchbook" }));
    expect(state.selectedId).toBe(5);
  });
});

describe("marking", () => {
  it("selects and posts a confirmation notice", () => {
    const state = applyMark(freshState(), 7, "The box (id: 7) has attributes: color: blue.");
    expect(state.selectedId).toBe(7);
    const last = state.transcript[state.transcript.length - 1];
    if (last.kind === "notice") {
      expect(last.text).toBe("Marked: The box (id: 7) has attributes: color: blue.");
    } else {
      throw new Error("expected a notice turn");
    }
  });
});
