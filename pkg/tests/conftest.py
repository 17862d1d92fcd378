from __future__ import annotations

import json
from pathlib import Path

import pytest

from scenealign.graph import ObjectNode, SceneGraph
from scenealign.harness import load_scene

# One pass/fail line per acceptance criterion, printed in the summary.
_acceptance_docs: dict[str, str] = {}
_acceptance_order: dict[str, int] = {}
_acceptance_outcomes: dict[str, str] = {}


def pytest_collection_modifyitems(items) -> None:
    for item in items:
        if "test_acceptance.py" in item.nodeid:
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _acceptance_docs[item.nodeid] = doc
            _acceptance_order[item.nodeid] = len(_acceptance_order)


def pytest_runtest_logreport(report) -> None:
    if report.nodeid not in _acceptance_docs:
        return
    if report.when == "call":
        _acceptance_outcomes[report.nodeid] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_outcomes[report.nodeid] = "FAIL"


def pytest_terminal_summary(terminalreporter) -> None:
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_outcomes, key=_acceptance_order.__getitem__):
        outcome = _acceptance_outcomes[nodeid]
        terminalreporter.write_line(f"[{outcome}] {_acceptance_docs[nodeid]}")

FIXTURES = Path(__file__).parent / "fixtures"
SCENES_DIR = FIXTURES / "scenes"
SCENARIOS_DIR = FIXTURES / "scenarios"


@pytest.fixture
def demo_graph() -> SceneGraph:
    return load_scene(SCENES_DIR / "demo.json")


@pytest.fixture
def demo_document() -> dict:
    return json.loads((SCENES_DIR / "demo.json").read_text(encoding="utf-8"))


def scenario_path(name: str) -> Path:
    return SCENARIOS_DIR / f"{name}.json"


def make_node(
    node_id: int,
    label: str = "box",
    centroid=(0.0, 0.0, 0.5),
    half=(0.5, 0.5, 0.5),
    attributes=None,
) -> ObjectNode:
    return ObjectNode(
        id=node_id,
        label=label,
        centroid=centroid,
        half_extents=half,
        attributes=attributes or {},
    )
