from __future__ import annotations

import json

import pytest

from scenealign.agent import AgentRuntime
from scenealign.backends import BackendRequest, ScriptedBackend
from scenealign.graph import SpatialRelation
from scenealign.harness import (
    QAItem,
    load_qa_file,
    load_ratings_file,
    load_scene,
    run_benchmark,
    traces_from_jsonl,
)
from scenealign.relations import infer_and_verify
from scenealign.rendering import graph_to_dict

from conftest import FIXTURES, SCENES_DIR, scenario_path

QA_FILE = FIXTURES / "qa" / "demo_qa.jsonl"


def qa_backend() -> ScriptedBackend:
    return ScriptedBackend.from_files(
        scenario_path("fig2"), scenario_path("fallback")
    )


class TestFileLoading:
    def test_load_qa_file(self):
        items = load_qa_file(QA_FILE)
        assert len(items) == 3
        assert items[0] == QAItem(
            "demo",
            "What is on the blue box?",
            ("The book (id: 5) is on the blue box.", "book"),
        )

    def test_load_qa_rejects_empty_answers(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"scene_id": "s", "question": "q", "answers": []}\n')
        with pytest.raises(ValueError, match="line 1"):
            load_qa_file(bad)

    def test_load_ratings(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text(
            '{"interaction_id": "a", "reasonable": true}\n'
            '{"interaction_id": "b", "reasonable": false, "task_success": true}\n'
        )
        ratings = load_ratings_file(path)
        assert [r.interaction_id for r in ratings] == ["a", "b"]
        assert ratings[1].task_success is True

    def test_load_scene_with_edges_keeps_them(self, demo_graph):
        stored = {r.triple() for r in demo_graph.edges()}
        assert (0, "support", 2) in stored
        assert demo_graph.revision == 0

    def test_load_scene_without_edges_infers(self, tmp_path, demo_document):
        doc = dict(demo_document)
        doc.pop("edges")
        path = tmp_path / "demo.json"
        path.write_text(json.dumps(doc))
        graph = load_scene(path)
        inferred = {r.triple() for r in infer_and_verify(graph)}
        assert {r.triple() for r in graph.edges()} == inferred
        assert graph.revision == 0
        assert graph.has_edge(SpatialRelation(7, "support", 5))


class TestTracesFromJsonl:
    def test_round_trip_from_runtime_log(self, demo_graph, tmp_path):
        path = tmp_path / "trace.jsonl"
        runtime = AgentRuntime(qa_backend())
        live = runtime.run_interaction(
            "What is on the blue box?", demo_graph, interaction_id="i-9",
            trace_path=path,
        )
        rebuilt = traces_from_jsonl(path)
        assert len(rebuilt) == 1
        t = rebuilt[0]
        assert t.interaction_id == "i-9"
        assert t.status == live.status
        assert t.final_response == live.final_response
        assert t.query_ratio == pytest.approx(live.query_ratio)
        assert [s.action for s in t.steps] == [s.action for s in live.steps]

    def test_parse_error_lines_skipped(self, demo_graph, tmp_path):
        path = tmp_path / "trace.jsonl"
        runtime = AgentRuntime(ScriptedBackend.from_files(scenario_path("gibberish")))
        runtime.run_interaction("anything", demo_graph, trace_path=path)
        rebuilt = traces_from_jsonl(path)
        assert len(rebuilt) == 1
        assert rebuilt[0].steps == ()
        assert rebuilt[0].status == "parse_failure"


class TestRunBenchmark:
    def test_three_item_fixture(self, tmp_path):
        report = run_benchmark(QA_FILE, SCENES_DIR, qa_backend(),
                               report_path=tmp_path / "report.jsonl")
        rows = report["rows"]
        agg = report["aggregate"]
        assert len(rows) == 2
        assert rows[0]["prediction"] == "The book (id: 5) is on the blue box."
        assert rows[0]["em"] == 1
        assert rows[0]["bleu1"] == pytest.approx(1.0)
        assert rows[0]["rouge_l"] == pytest.approx(1.0)
        assert rows[1]["prediction"] == "Hello! Ask me about the scene."
        assert agg["count"] == 2
        assert agg["em"] == pytest.approx(1.0)
        assert [s["scene_id"] for s in agg["skipped"]] == ["atlantis"]
        assert agg["meteor"] == "omitted"
        assert agg["tokenizer"]

    def test_report_file_shape(self, tmp_path):
        path = tmp_path / "report.jsonl"
        run_benchmark(QA_FILE, SCENES_DIR, qa_backend(), report_path=path)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert sum(1 for l in lines if l.get("aggregate")) == 1
        assert sum(1 for l in lines if l.get("skipped") == "missing scene") == 1
        assert lines[-1]["aggregate"] is True

    def test_resume_skips_completed_items(self, tmp_path):
        path = tmp_path / "report.jsonl"
        run_benchmark(QA_FILE, SCENES_DIR, qa_backend(), report_path=path)

        class Exploding:
            def complete(self, request: BackendRequest) -> str:
                raise AssertionError("resume must not re-run completed items")

        report = run_benchmark(QA_FILE, SCENES_DIR, Exploding(), report_path=path)
        assert len(report["rows"]) == 2
        assert report["aggregate"]["em"] == pytest.approx(1.0)

    def test_empty_qa_file(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        report = run_benchmark(empty, SCENES_DIR, qa_backend())
        assert report["rows"] == []
        assert report["aggregate"]["count"] == 0

    def test_benchmark_does_not_persist_scene_mutations(self, tmp_path, demo_graph):
        before = graph_to_dict(demo_graph)
        run_benchmark(QA_FILE, SCENES_DIR, qa_backend(), report_path=tmp_path / "r.jsonl")
        after = graph_to_dict(load_scene(SCENES_DIR / "demo.json"))
        assert before == after
