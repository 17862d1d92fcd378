"""The plan/thought/action/observation loop.

Assembles step-wise prompts from the tool descriptors and the running
history, parses backend output against a fixed grammar, executes tools,
and terminates on final_answer, the step cap, or repeated parse failures.
Traces are append-only JSONL, deterministic so replays compare byte-equal.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .backends import Backend, BackendError, BackendRequest
from .graph import SceneGraph
from .relations import RelationConfig
from .rendering import query_ratio
from .tools import (
    TOOL_DESCRIPTORS,
    TOOL_NAMES,
    Click,
    Highlight,
    Toolbox,
    ToolError,
    coerce_arguments,
)

logger = logging.getLogger(__name__)

STEP_LIMIT_RESPONSE = "I could not complete this request."
PARSE_FAILURE_RESPONSE = (
    "I am sorry, I could not work out a valid next action for this request."
)
BACKEND_FAILURE_RESPONSE = (
    "I am sorry, the language model backend is currently unavailable."
)

SYSTEM_PROMPT = (
    "You are an assistant embedded in a 3D scene understanding workbench. "
    "You answer questions about the scene and align its scene graph with "
    "user corrections, acting only through the tools listed below.\n"
    "\n"
    "Respond at every step using exactly this grammar:\n"
    "Plan:\n"
    "1. <first sub-task>\n"
    "2. <second sub-task>\n"
    "Thought: <your reasoning about the current step>\n"
    "Action: <tool name>\n"
    "Action Input: <single-line JSON object with the tool's named parameters>\n"
    "\n"
    "Rules:\n"
    "- Produce the Plan block at step 1 only, never afterwards.\n"
    "- Rewrite user phrasing into canonical noun phrases before calling "
    "query_for_objects (for example 'that big blue container' becomes 'blue box').\n"
    "- Observations may report errors; adjust your next action accordingly.\n"
    "- Finish by calling final_answer with the response for the user.\n"
    "\n"
    "Tools:\n"
    + "\n".join(f"- {d.signature()}: {d.description}" for d in TOOL_DESCRIPTORS)
)


class ParseError(Exception):
    """Unparseable backend output; message becomes the next observation."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


@dataclass(frozen=True)
class ParsedAction:
    plan: str | None
    thought: str
    action: str
    arguments: dict


@dataclass(frozen=True)
class AgentStep:
    index: int
    plan: str | None
    thought: str
    action: str
    action_input: dict
    observation: str
    graph_changed: bool = False


@dataclass(frozen=True)
class AgentTrace:
    interaction_id: str
    user_input: str
    marked_click: Click | None
    steps: tuple[AgentStep, ...]
    final_response: str
    status: str  # completed | step_limit | parse_failure | backend_failure
    query_ratio: float | None = None
    highlights: tuple[Highlight, ...] = ()
    log_lines: tuple[str, ...] = ()


@dataclass(frozen=True)
class RuntimeConfig:
    max_steps: int = 12
    max_parse_failures: int = 3
    max_tokens: int = 1024
    temperature: float = 0.0


def parse_action(raw: str, expect_plan: bool = False) -> ParsedAction:
    """Parses one backend completion against the output grammar."""
    lines = raw.strip().splitlines()
    plan_lines: list[str] | None = None
    thought_lines: list[str] | None = None
    action: str | None = None
    action_input_raw: str | None = None
    for line in lines:
        stripped = line.strip()
        if action is not None and action_input_raw is None:
            if stripped.startswith("Action Input:"):
                action_input_raw = stripped[len("Action Input:"):].strip()
            continue
        if action_input_raw is not None:
            continue
        if stripped.startswith("Plan:") and thought_lines is None and plan_lines is None:
            plan_lines = []
            rest = stripped[len("Plan:"):].strip()
            if rest:
                plan_lines.append(rest)
            continue
        if stripped.startswith("Thought:"):
            thought_lines = [stripped[len("Thought:"):].strip()]
            continue
        if stripped.startswith("Action:"):
            if thought_lines is None:
                raise ParseError("Error: expected a 'Thought:' line before 'Action:'.")
            action = stripped[len("Action:"):].strip()
            continue
        if thought_lines is not None:
            thought_lines.append(stripped)
        elif plan_lines is not None:
            plan_lines.append(stripped)
    if thought_lines is None:
        raise ParseError("Error: expected a 'Thought:' line.")
    if action is None:
        raise ParseError("Error: expected an 'Action:' line naming a tool.")
    if not action:
        raise ParseError("Error: the 'Action:' line names no tool.")
    if action not in TOOL_NAMES:
        raise ParseError(
            f"Error: unknown tool '{action}'. Available tools: {', '.join(TOOL_NAMES)}"
        )
    if action_input_raw is None:
        raise ParseError(
            "Error: expected an 'Action Input:' line with a single-line JSON object."
        )
    try:
        arguments = json.loads(action_input_raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Error: Action Input is not valid JSON: {exc.msg}.") from exc
    if not isinstance(arguments, dict):
        raise ParseError("Error: Action Input must be a JSON object of named arguments.")
    try:
        arguments = coerce_arguments(action, arguments)
    except ToolError as exc:
        raise ParseError(f"Error: {exc}") from exc
    plan = "\n".join(plan_lines).strip() if plan_lines is not None else None
    if plan == "":
        plan = None
    if expect_plan and plan is None:
        raise ParseError("Error: the first step must begin with a 'Plan:' block.")
    if not expect_plan and plan is not None:
        logger.debug("dropping plan emitted after step 1")
        plan = None
    thought = "\n".join(thought_lines).strip()
    return ParsedAction(plan, thought, action, arguments)


def _history_block(step: AgentStep) -> str:
    parts = []
    if step.plan is not None:
        parts.append(f"Plan:\n{step.plan}")
    parts.append(f"Thought: {step.thought}")
    parts.append(f"Action: {step.action}")
    parts.append(f"Action Input: {json.dumps(step.action_input, sort_keys=True)}")
    parts.append(f"Observation: {step.observation}")
    return "\n".join(parts)


def assemble_step_prompt(
    user_input: str, marked: bool, history: list[str], next_index: int
) -> str:
    mark_note = (
        "registered (use find_marked_object to inspect it)" if marked else "none"
    )
    sections = [f"User input: {user_input}", f"Marked object: {mark_note}"]
    sections.extend(history)
    sections.append(f"Begin step {next_index}.")
    return "\n\n".join(sections)


@dataclass
class AgentRuntime:
    """Runs interactions for one backend; stateless between interactions."""

    backend: Backend
    config: RuntimeConfig = field(default_factory=RuntimeConfig)
    relation_config: RelationConfig = field(default_factory=RelationConfig)

    def run_interaction(
        self,
        user_input: str,
        graph: SceneGraph,
        mark: Click | None = None,
        interaction_id: str = "",
        trace_path: str | Path | None = None,
    ) -> AgentTrace:
        toolbox = Toolbox(graph, self.relation_config, mark)
        steps: list[AgentStep] = []
        history: list[str] = []
        observations: list = []
        highlights: list[Highlight] = []
        highlighted_ids: set[int] = set()
        records: list[str] = []
        consecutive_failures = 0
        calls = 0
        status = ""
        final_response = ""

        def record(entry: dict) -> None:
            records.append(json.dumps(entry, sort_keys=True, ensure_ascii=False))

        while True:
            if len(steps) >= self.config.max_steps:
                status, final_response = "step_limit", STEP_LIMIT_RESPONSE
                break
            calls += 1
            next_index = len(steps) + 1
            request = BackendRequest(
                system_prompt=SYSTEM_PROMPT,
                step_prompt=assemble_step_prompt(
                    user_input, mark is not None, history, next_index
                ),
                step_index=calls,
                user_input=user_input,
                max_tokens=self.config.max_tokens,
                temperature=self.config.temperature,
            )
            try:
                raw = self.backend.complete(request)
            except BackendError as exc:
                status, final_response = "backend_failure", BACKEND_FAILURE_RESPONSE
                record({"type": "backend_error", "error": str(exc)})
                break
            try:
                parsed = parse_action(raw, expect_plan=next_index == 1)
            except ParseError as exc:
                consecutive_failures += 1
                record({"type": "parse_error", "error": exc.message, "raw": raw})
                history.append(f"Observation: {exc.message}")
                if consecutive_failures >= self.config.max_parse_failures:
                    status, final_response = "parse_failure", PARSE_FAILURE_RESPONSE
                    break
                continue
            consecutive_failures = 0
            graph_changed = False
            payload = None
            try:
                result = toolbox.execute(parsed.action, parsed.arguments)
                observation_text = result.observation.text
                observations.append(result.observation)
                graph_changed = result.graph_changed
                payload = result.payload
                if parsed.action == "post_process":
                    for item in result.payload:
                        if item.id not in highlighted_ids:
                            highlighted_ids.add(item.id)
                            highlights.append(item)
            except ToolError as exc:
                observation_text = str(exc)
            step = AgentStep(
                index=next_index,
                plan=parsed.plan,
                thought=parsed.thought,
                action=parsed.action,
                action_input=parsed.arguments,
                observation=observation_text,
                graph_changed=graph_changed,
            )
            steps.append(step)
            history.append(_history_block(step))
            record(
                {
                    "type": "step",
                    "index": step.index,
                    "plan": step.plan,
                    "thought": step.thought,
                    "action": step.action,
                    "action_input": step.action_input,
                    "observation": step.observation,
                    "graph_changed": step.graph_changed,
                }
            )
            if parsed.action == "final_answer" and payload is not None:
                status, final_response = "completed", payload
                break

        ratio = query_ratio(observations, graph)
        record(
            {
                "type": "end",
                "interaction_id": interaction_id,
                "status": status,
                "final_response": final_response,
                "query_ratio": ratio,
            }
        )
        trace = AgentTrace(
            interaction_id=interaction_id,
            user_input=user_input,
            marked_click=mark,
            steps=tuple(steps),
            final_response=final_response,
            status=status,
            query_ratio=ratio,
            highlights=tuple(highlights),
            log_lines=tuple(records),
        )
        if trace_path is not None:
            write_trace_lines(trace_path, trace.log_lines)
        return trace


def write_trace_lines(path: str | Path, lines: tuple[str, ...]) -> None:
    """Appends trace records and flushes them to disk before returning."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def trace_to_dict(trace: AgentTrace) -> dict:
    """JSON-friendly view of a trace for service responses."""
    click = None
    if trace.marked_click is not None:
        click = (
            {"object_id": trace.marked_click.object_id}
            if trace.marked_click.object_id is not None
            else {"point": list(trace.marked_click.point)}
        )
    return {
        "interaction_id": trace.interaction_id,
        "user_input": trace.user_input,
        "marked_click": click,
        "status": trace.status,
        "final_response": trace.final_response,
        "query_ratio": trace.query_ratio,
        "steps": [
            {
                "index": s.index,
                "plan": s.plan,
                "thought": s.thought,
                "action": s.action,
                "action_input": s.action_input,
                "observation": s.observation,
                "graph_changed": s.graph_changed,
            }
            for s in trace.steps
        ],
        "highlights": [
            {"id": h.id, "label": h.label, "centroid": list(h.centroid)}
            for h in trace.highlights
        ],
    }
