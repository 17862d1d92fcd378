"""Batch evaluation: QA benchmark runs over scene files and aggregation
of per-session alignment metrics from traces and human ratings."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .agent import AgentRuntime, AgentStep, AgentTrace
from .backends import Backend, BackendRequest
from .graph import SceneGraph
from .metrics import bleu1, cider_scores, exact_match, rouge_l
from .relations import RelationConfig, infer_and_verify
from .rendering import deserialize, has_edges_field

logger = logging.getLogger(__name__)

TOKENIZER_NOTE = "lowercase alphanumeric words"

JUDGE_SYSTEM_PROMPT = (
    "You grade answers to questions about a 3D scene. Given the question, "
    "the candidate answer, and the reference answers, decide whether the "
    "candidate is correct. Reply with a single token: YES or NO."
)


@dataclass(frozen=True)
class QAItem:
    scene_id: str
    question: str
    gold_answers: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.gold_answers:
            raise ValueError("a QA item needs at least one gold answer")


@dataclass(frozen=True)
class SessionMetrics:
    """Fractions are None when nothing was judged/rated/measured, which is
    different from a measured zero."""

    sr_llm: float | None
    rr_interaction: float | None
    interactions_per_task: float
    actions_per_interaction: float
    query_ratio: float | None


@dataclass(frozen=True)
class InteractionRating:
    interaction_id: str
    reasonable: bool
    task_success: bool | None = None


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    interaction_ids: tuple[str, ...]
    success: bool | None = None


@dataclass(frozen=True)
class JudgeVerdict:
    success: bool
    flagged: bool
    raw: str


def judge_success(
    question: str, final_answer: str, gold: Sequence[str], backend: Backend
) -> JudgeVerdict:
    """LLM-judged correctness; anything but a clear YES/NO counts as a
    failure and is flagged."""
    step_prompt = (
        f"Question: {question}\n"
        f"Candidate answer: {final_answer}\n"
        f"Reference answers: {'; '.join(gold)}\n"
        "Is the candidate answer correct? Reply YES or NO."
    )
    raw = backend.complete(
        BackendRequest(
            system_prompt=JUDGE_SYSTEM_PROMPT,
            step_prompt=step_prompt,
            step_index=1,
            user_input=question,
            max_tokens=8,
            temperature=0.0,
        )
    )
    head = raw.strip().split()
    token = head[0].strip(".,!:;").upper() if head else ""
    if token == "YES":
        return JudgeVerdict(True, False, raw)
    if token == "NO":
        return JudgeVerdict(False, False, raw)
    logger.warning("unparseable judge verdict %r counted as failure", raw)
    return JudgeVerdict(False, True, raw)


def session_metrics(
    traces: Sequence[AgentTrace],
    ratings: Sequence[InteractionRating] = (),
    tasks: Sequence[TaskRecord] = (),
) -> SessionMetrics:
    """Aggregates alignment metrics; a pure fold, so trace order is
    irrelevant. Without task records the whole bundle is one task."""
    if not tasks and traces:
        tasks = (
            TaskRecord("session", tuple(t.interaction_id for t in traces), None),
        )
    included = [t for t in tasks if t.interaction_ids]
    skipped = [t.task_id for t in tasks if not t.interaction_ids]
    if skipped:
        logger.warning("tasks with zero interactions excluded: %s", ", ".join(skipped))

    judged = [t.success for t in included if t.success is not None]
    sr_llm = sum(judged) / len(judged) if judged else None
    rr = sum(r.reasonable for r in ratings) / len(ratings) if ratings else None
    per_task = [len(t.interaction_ids) for t in included]
    interactions_per_task = sum(per_task) / len(per_task) if per_task else 0.0
    actions = [len(t.steps) for t in traces]
    actions_per_interaction = sum(actions) / len(actions) if actions else 0.0
    ratios = [t.query_ratio for t in traces if t.query_ratio is not None]
    mean_ratio = sum(ratios) / len(ratios) if ratios else None
    return SessionMetrics(
        sr_llm=sr_llm,
        rr_interaction=rr,
        interactions_per_task=interactions_per_task,
        actions_per_interaction=actions_per_interaction,
        query_ratio=mean_ratio,
    )


# -- file formats ----------------------------------------------------------------


def load_qa_file(path: str | Path) -> list[QAItem]:
    """JSONL, one {"scene_id", "question", "answers": [...]} per line."""
    items = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        row = json.loads(line)
        try:
            items.append(
                QAItem(row["scene_id"], row["question"], tuple(row["answers"]))
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}, line {line_no}: {exc}") from exc
    return items


def load_ratings_file(path: str | Path) -> list[InteractionRating]:
    """JSONL, one {"interaction_id", "reasonable", "task_success"?} per line."""
    ratings = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        ratings.append(
            InteractionRating(
                interaction_id=row["interaction_id"],
                reasonable=bool(row["reasonable"]),
                task_success=row.get("task_success"),
            )
        )
    return ratings


def traces_from_jsonl(path: str | Path) -> list[AgentTrace]:
    """Rebuilds traces from a trace log; parse-error lines are skipped
    (they carry no executed action)."""
    traces = []
    steps: list[AgentStep] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        kind = row.get("type")
        if kind == "step":
            steps.append(
                AgentStep(
                    index=row["index"],
                    plan=row.get("plan"),
                    thought=row["thought"],
                    action=row["action"],
                    action_input=row["action_input"],
                    observation=row["observation"],
                    graph_changed=row.get("graph_changed", False),
                )
            )
        elif kind == "end":
            traces.append(
                AgentTrace(
                    interaction_id=row.get("interaction_id", ""),
                    user_input="",
                    marked_click=None,
                    steps=tuple(steps),
                    final_response=row.get("final_response", ""),
                    status=row.get("status", ""),
                    query_ratio=row.get("query_ratio"),
                )
            )
            steps = []
    return traces


def load_scene(path: str | Path, config: RelationConfig | None = None) -> SceneGraph:
    """Reads a scene document; infers relations when the file states none."""
    text = Path(path).read_text(encoding="utf-8")
    graph = deserialize(text)
    if not has_edges_field(text):
        for rel in infer_and_verify(graph, config):
            graph.insert_edge(rel)
        graph.revision = 0
    return graph


# -- QA benchmark ----------------------------------------------------------------


def run_benchmark(
    qa_file: str | Path,
    scenes_dir: str | Path,
    backend: Backend,
    report_path: str | Path | None = None,
    runtime: AgentRuntime | None = None,
) -> dict:
    """Runs every QA item through the agent loop and scores the answers.

    Items already present in the report file are not re-run; the report is
    rewritten each time with per-item rows plus one aggregate line.
    """
    items = load_qa_file(qa_file)
    scenes_dir = Path(scenes_dir)
    runtime = runtime or AgentRuntime(backend)

    done: dict[tuple[str, str], dict] = {}
    if report_path is not None and Path(report_path).exists():
        for line in Path(report_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            if row.get("aggregate") or row.get("skipped"):
                continue
            done[(row["scene_id"], row["question"])] = row

    rows: list[dict] = []
    skipped: list[dict] = []
    for item in items:
        key = (item.scene_id, item.question)
        if key in done:
            rows.append(done[key])
            continue
        scene_path = scenes_dir / f"{item.scene_id}.json"
        if not scene_path.exists():
            skipped.append(
                {"scene_id": item.scene_id, "question": item.question,
                 "skipped": "missing scene"}
            )
            continue
        graph = load_scene(scene_path, runtime.relation_config)
        trace = runtime.run_interaction(item.question, graph)
        pred = trace.final_response
        rows.append(
            {
                "scene_id": item.scene_id,
                "question": item.question,
                "prediction": pred,
                "gold_answers": list(item.gold_answers),
                "status": trace.status,
                "em": exact_match(pred, item.gold_answers),
                "bleu1": bleu1(pred, item.gold_answers),
                "rouge_l": rouge_l(pred, item.gold_answers),
            }
        )

    preds = [row["prediction"] for row in rows]
    golds = [row["gold_answers"] for row in rows]
    per_item_cider = cider_scores(preds, golds) if rows else []
    for row, score in zip(rows, per_item_cider):
        row["cider"] = score

    count = len(rows)
    aggregate = {
        "aggregate": True,
        "count": count,
        "em": sum(r["em"] for r in rows) / count if count else 0.0,
        "bleu1": sum(r["bleu1"] for r in rows) / count if count else 0.0,
        "rouge_l": sum(r["rouge_l"] for r in rows) / count if count else 0.0,
        "cider": sum(per_item_cider) / count if count else 0.0,
        "skipped": skipped,
        "tokenizer": TOKENIZER_NOTE,
        "meteor": "omitted",
    }
    report = {"rows": rows, "aggregate": aggregate}
    if report_path is not None:
        lines = [json.dumps(r, sort_keys=True) for r in rows + skipped]
        lines.append(json.dumps(aggregate, sort_keys=True))
        Path(report_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report


def metrics_to_dict(metrics: SessionMetrics) -> Mapping[str, float]:
    return {
        "sr_llm": metrics.sr_llm,
        "rr_interaction": metrics.rr_interaction,
        "interactions_per_task": metrics.interactions_per_task,
        "actions_per_interaction": metrics.actions_per_interaction,
        "query_ratio": metrics.query_ratio,
    }
