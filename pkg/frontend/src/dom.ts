/**
 * DOM rendering and event wiring. Everything on screen is redrawn from the
 * latest ViewState; handlers only call Controller methods.
 */

import type { Controller } from "./controller.js";
import { edgeRows, nodeRows, sceneRects } from "./panels.js";
import { pickObject, screenToWorld } from "./projection.js";
import type { AgentTurn, Turn, ViewState } from "./state.js";

const DRAG_THRESHOLD_PX = 4;

interface Refs {
  canvas: HTMLCanvasElement;
  sceneCaption: HTMLElement;
  nodeList: HTMLElement;
  edgeList: HTMLElement;
  chatLog: HTMLElement;
  chatInput: HTMLInputElement;
  sendBtn: HTMLButtonElement;
  statusLine: HTMLElement;
}

function grabRefs(): Refs {
  return {
    canvas: document.getElementById("scene-canvas") as HTMLCanvasElement,
    sceneCaption: document.getElementById("scene-caption")!,
    nodeList: document.getElementById("graph-nodes")!,
    edgeList: document.getElementById("graph-edges")!,
    chatLog: document.getElementById("chat-log")!,
    chatInput: document.getElementById("chat-input") as HTMLInputElement,
    sendBtn: document.getElementById("chat-send") as HTMLButtonElement,
    statusLine: document.getElementById("status-line")!,
  };
}

// ---------------------------------------------------------------------------
// Scene panel
// ---------------------------------------------------------------------------

function drawScene(refs: Refs, state: ViewState): void {
  const ctx = refs.canvas.getContext("2d")!;
  ctx.clearRect(0, 0, refs.canvas.width, refs.canvas.height);
  if (state.graph === null) return;

  for (const rect of sceneRects(state.graph, state.viewport, state.selectedId, state.highlightIds)) {
    ctx.fillStyle = rect.selected ? "rgba(37, 99, 235, 0.35)" : "rgba(100, 116, 139, 0.25)";
    ctx.fillRect(rect.x, rect.y, rect.width, rect.height);
    if (rect.highlighted) {
      ctx.lineWidth = 3;
      ctx.strokeStyle = "#ea580c";
    } else {
      ctx.lineWidth = rect.selected ? 2 : 1;
      ctx.strokeStyle = rect.selected ? "#2563eb" : "#475569";
    }
    ctx.strokeRect(rect.x, rect.y, rect.width, rect.height);
    if (rect.width > 28 && rect.height > 12) {
      ctx.fillStyle = "#1e293b";
      ctx.font = "11px system-ui, sans-serif";
      ctx.fillText(rect.label, rect.x + 3, rect.y + 12, rect.width - 6);
    }
  }
  refs.sceneCaption.textContent =
    `${state.graph.objects.length} objects, revision ${state.revision}` +
    (state.selectedId !== null ? `, marked id ${state.selectedId}` : "");
}

function wireScene(refs: Refs, controller: Controller): void {
  const canvas = refs.canvas;
  let down: { x: number; y: number } | null = null;
  let dragged = false;
  let last: { x: number; y: number } | null = null;

  const local = (ev: MouseEvent) => {
    const bounds = canvas.getBoundingClientRect();
    return { x: ev.clientX - bounds.left, y: ev.clientY - bounds.top };
  };

  canvas.addEventListener("pointerdown", (ev) => {
    down = local(ev);
    last = down;
    dragged = false;
    canvas.setPointerCapture(ev.pointerId);
  });

  canvas.addEventListener("pointermove", (ev) => {
    const p = local(ev);
    if (down !== null && last !== null) {
      if (Math.hypot(p.x - down.x, p.y - down.y) > DRAG_THRESHOLD_PX) dragged = true;
      if (dragged) {
        controller.pan(p.x - last.x, p.y - last.y);
        last = p;
      }
      return;
    }
    const graph = controller.state.graph;
    if (graph === null) return;
    const w = screenToWorld(controller.state.viewport, p.x, p.y);
    const hit = pickObject(graph.objects, w.x, w.y);
    const node = hit === null ? null : graph.objects.find((o) => o.id === hit);
    canvas.title = node ? `${node.label} (id: ${node.id})` : "";
  });

  canvas.addEventListener("pointerup", (ev) => {
    const wasDrag = dragged;
    const p = local(ev);
    down = null;
    last = null;
    dragged = false;
    canvas.releasePointerCapture(ev.pointerId);
    if (!wasDrag) void controller.clickScene(p.x, p.y);
  });

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const p = local(ev);
    controller.zoom(p.x, p.y, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  });
}

// ---------------------------------------------------------------------------
// Graph panel
// ---------------------------------------------------------------------------

function drawGraphPanel(refs: Refs, state: ViewState, controller: Controller): void {
  refs.nodeList.replaceChildren();
  refs.edgeList.replaceChildren();
  if (state.graph === null) return;

  for (const row of nodeRows(state.graph)) {
    const item = document.createElement("li");
    item.className = row.id === state.selectedId ? "node-row selected" : "node-row";
    const head = document.createElement("span");
    head.className = "node-head";
    head.textContent = `${row.label} (id: ${row.id})`;
    item.appendChild(head);
    if (row.detail) {
      const detail = document.createElement("span");
      detail.className = "node-detail";
      detail.textContent = row.detail;
      item.appendChild(detail);
    }
    item.addEventListener("click", () => void controller.clickNode(row.id));
    refs.nodeList.appendChild(item);
  }

  for (const text of edgeRows(state.graph)) {
    const item = document.createElement("li");
    item.textContent = text;
    refs.edgeList.appendChild(item);
  }
}

// ---------------------------------------------------------------------------
// Chat panel
// ---------------------------------------------------------------------------

function turnElement(turn: Turn, controller: Controller): HTMLElement {
  const wrap = document.createElement("div");
  if (turn.kind === "user") {
    wrap.className = "turn turn-user";
    wrap.textContent = turn.text;
    return wrap;
  }
  if (turn.kind === "notice") {
    wrap.className = "turn turn-notice";
    wrap.textContent = turn.text;
    return wrap;
  }
  wrap.className = "turn turn-agent";
  const text = document.createElement("div");
  text.textContent = turn.text;
  wrap.appendChild(text);
  if (turn.steps.length > 0) {
    wrap.appendChild(stepsElement(turn, controller));
  }
  wrap.appendChild(ratingElement(turn, controller));
  return wrap;
}

function stepsElement(turn: AgentTurn, controller: Controller): HTMLElement {
  const details = document.createElement("details");
  details.open = turn.stepsExpanded;
  const summary = document.createElement("summary");
  summary.textContent = `${turn.steps.length} steps (${turn.status})`;
  details.appendChild(summary);
  summary.addEventListener("click", (ev) => {
    ev.preventDefault();
    controller.toggleSteps(turn.interactionId);
  });
  for (const step of turn.steps) {
    const block = document.createElement("pre");
    block.className = "step";
    const lines = [];
    if (step.plan !== null) lines.push(`Plan: ${step.plan}`);
    lines.push(`Thought: ${step.thought}`);
    lines.push(`Action: ${step.action} ${JSON.stringify(step.action_input)}`);
    lines.push(`Observation: ${step.observation}`);
    block.textContent = lines.join("\n");
    details.appendChild(block);
  }
  return details;
}

function ratingElement(turn: AgentTurn, controller: Controller): HTMLElement {
  const row = document.createElement("div");
  row.className = "rating";
  for (const [label, value] of [["reasonable", true], ["unreasonable", false]] as const) {
    const btn = document.createElement("button");
    btn.textContent = turn.rating === value ? `[${label}]` : label;
    btn.disabled = turn.rating !== null;
    btn.addEventListener("click", () => void controller.rate(turn.interactionId, value));
    row.appendChild(btn);
  }
  return row;
}

function drawChat(refs: Refs, state: ViewState, controller: Controller): void {
  refs.chatLog.replaceChildren(...state.transcript.map((t) => turnElement(t, controller)));
  refs.chatLog.scrollTop = refs.chatLog.scrollHeight;
  refs.chatInput.disabled = state.busy;
  refs.sendBtn.disabled = state.busy;
  refs.statusLine.textContent = state.busy ? "interaction running..." : "";
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

export function bindDom(controller: Controller): void {
  const refs = grabRefs();

  const render = (state: ViewState) => {
    drawScene(refs, state);
    drawGraphPanel(refs, state, controller);
    drawChat(refs, state, controller);
  };
  controller.onChange = render;

  const submit = () => {
    const text = refs.chatInput.value;
    refs.chatInput.value = "";
    void controller.send(text);
  };
  refs.sendBtn.addEventListener("click", submit);
  refs.chatInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") submit();
  });

  wireScene(refs, controller);
  render(controller.state);
}
