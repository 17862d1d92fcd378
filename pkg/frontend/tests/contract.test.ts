/**
 * Contract tests against the real HTTP service with the scripted backend.
 * A `scenealign serve` child process is started once for the file; every
 * test opens its own session so the canned scenarios see fresh graphs.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import { nodeRows, sceneRects } from "../src/panels.js";
import { worldToScreen } from "../src/projection.js";
import type { AgentTurn } from "../src/state.js";

const repoRoot = fileURLToPath(new URL("../..", import.meta.url));
const scenesDir = join(repoRoot, "tests", "fixtures", "scenes");
const scenarioFiles = ["fig2", "alignment", "novel_aligned", "fallback"]
  .map((name) => join(repoRoot, "tests", "fixtures", "scenarios", `${name}.json`))
  .join(",");

const port = 20000 + Math.floor(Math.random() * 20000);
const baseUrl = `http://127.0.0.1:${port}`;
const api = new ApiClient(baseUrl);

let server: ChildProcess;
let serverLog = "";

async function waitForService(deadlineMs: number): Promise<void> {
  const deadline = Date.now() + deadlineMs;
  while (Date.now() < deadline) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early (code ${server.exitCode}):\n${serverLog}`);
    }
    try {
      const res = await fetch(`${baseUrl}/tools`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`service not reachable after ${deadlineMs}ms:\n${serverLog}`);
}

beforeAll(async () => {
  server = spawn(
    "scenealign",
    [
      "serve",
      "--scenes", scenesDir,
      "--listen", `127.0.0.1:${port}`,
      "--trace-dir", mkdtempSync(join(tmpdir(), "ui-contract-")),
    ],
    { env: { ...process.env, SCENEALIGN_SCENARIO_FILE: scenarioFiles } },
  );
  server.stdout?.on("data", (chunk) => (serverLog += chunk));
  server.stderr?.on("data", (chunk) => (serverLog += chunk));
  await waitForService(20000);
}, 30000);

afterAll(() => {
  server.kill();
});

function lastAgentTurn(controller: Controller): AgentTurn {
  const agents = controller.state.transcript.filter(
    (t): t is AgentTurn => t.kind === "agent",
  );
  expect(agents.length).toBeGreaterThan(0);
  return agents[agents.length - 1];
}

describe("mark by clicking", () => {
  it("clicking inside a box marks that node through the mark endpoint", async () => {
    const controller = await Controller.open(api, "demo");
    // World point inside box 7's footprint but clear of the book and key.
    const p = worldToScreen(controller.viewport, 2.62, 0.97);
    await controller.clickScene(p.x, p.y);

    expect(controller.state.selectedId).toBe(7);
    const last = controller.state.transcript[controller.state.transcript.length - 1];
    expect(last.kind).toBe("notice");
    if (last.kind === "notice") expect(last.text).toContain("(id: 7)");
  }, 30000);

  it("clicking open floor marks by 3d point and selects the resolved node", async () => {
    const controller = await Controller.open(api, "demo");
    const p = worldToScreen(controller.viewport, -3.5, 3.0);
    await controller.clickScene(p.x, p.y);

    // Nothing contains (-3.5, 3.0); the service resolves the nearest object.
    expect(controller.state.selectedId).toBe(6);
  }, 30000);

  it("panning is local: the view moves with no session change", async () => {
    const controller = await Controller.open(api, "demo");
    const before = controller.viewport;
    controller.pan(40, -25);
    expect(controller.viewport.offsetX).toBeCloseTo(before.offsetX + 40, 9);
    expect(controller.viewport.offsetY).toBeCloseTo(before.offsetY - 25, 9);
    expect(controller.state.selectedId).toBeNull();
    expect(controller.state.transcript).toEqual([]);
  }, 30000);
});

describe("chat-driven alignment", () => {
  it("a rename via chat refreshes the graph panel with the new label", async () => {
    const controller = await Controller.open(api, "demo");
    const click = worldToScreen(controller.viewport, 2.5, 0.9);
    await controller.clickScene(click.x, click.y);
    expect(controller.state.selectedId).toBe(5);

    await controller.send("That is actually a sketchbook.");
    const turn = lastAgentTurn(controller);
    expect(turn.status).toBe("completed");
    expect(controller.state.busy).toBe(false);
    expect(controller.state.revision).toBeGreaterThan(0);
    const rows = nodeRows(controller.state.graph!);
    expect(rows.find((r) => r.id === 5)?.label).toBe("sketchbook");

    // The transferred name answers a novel question in the same session.
    await controller.send("Where is the sketchbook?");
    expect(lastAgentTurn(controller).text).toBe(
      "The sketchbook (id: 5) is on the blue box (id: 7).",
    );
  }, 30000);

  it("a question response highlights the answer object in the scene panel", async () => {
    const controller = await Controller.open(api, "demo");
    await controller.send("What is on the blue box?");

    const turn = lastAgentTurn(controller);
    expect(turn.text).toBe("The book (id: 5) is on the blue box.");
    expect(turn.steps.length).toBe(4);
    expect(turn.stepsExpanded).toBe(false);
    expect(controller.state.highlightIds).toEqual([5]);
    const rects = sceneRects(
      controller.state.graph!,
      controller.viewport,
      controller.state.selectedId,
      controller.state.highlightIds,
    );
    expect(rects.find((r) => r.id === 5)?.highlighted).toBe(true);
    // Read-only question: the panel's revision is untouched.
    expect(controller.state.revision).toBe(0);
  }, 30000);
});

describe("rating", () => {
  it("the rating control posts the verdict and the service aggregates it", async () => {
    const controller = await Controller.open(api, "demo");

    await controller.send("Hello there.");
    const first = lastAgentTurn(controller);
    await controller.rate(first.interactionId, false);
    expect(lastAgentTurn(controller).rating).toBe(false);
    expect((await api.metrics(controller.state.sessionId)).rr_interaction).toBe(0);

    await controller.send("Hi again.");
    const second = lastAgentTurn(controller);
    await controller.rate(second.interactionId, true);
    expect((await api.metrics(controller.state.sessionId)).rr_interaction).toBeCloseTo(0.5, 9);
  }, 30000);
});
