"""HTTP service: scenes, per-user sessions, the chat loop, marking,
viewer pose, ratings, and metrics.

Sessions hold private graph copies. A message runs the agent loop on a
clone and swaps it in on completion, so concurrent reads observe the
pre-interaction revision; a second message while one runs is a conflict.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, model_validator

from .agent import AgentRuntime, AgentTrace, RuntimeConfig, trace_to_dict
from .backends import Backend
from .graph import GraphError, SceneGraph, ViewerPose
from .harness import InteractionRating, metrics_to_dict, session_metrics
from .relations import RelationConfig, infer_and_verify
from .rendering import (
    SerializationError,
    graph_from_dict,
    graph_to_dict,
    has_edges_field,
)
from .tools import TOOL_DESCRIPTORS, Click, Toolbox, ToolError


class ViewerRequest(BaseModel):
    position: tuple[float, float, float]
    yaw: float


class MarkRequest(BaseModel):
    object_id: int | None = None
    point: tuple[float, float, float] | None = None

    @model_validator(mode="after")
    def _exactly_one(self) -> MarkRequest:
        if (self.object_id is None) == (self.point is None):
            raise ValueError("provide exactly one of object_id or point")
        return self


class MessageRequest(BaseModel):
    text: str = Field(min_length=1)


class RateRequest(BaseModel):
    interaction_id: str
    reasonable: bool
    task_success: bool | None = None


@dataclass
class Session:
    session_id: str
    scene_id: str
    graph: SceneGraph
    viewer: ViewerPose = field(default_factory=ViewerPose)
    current_mark: Click | None = None
    interactions: list[AgentTrace] = field(default_factory=list)
    ratings: dict[str, InteractionRating] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _canonical_json(payload: dict) -> Response:
    body = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    return Response(content=body, media_type="application/json")


def create_app(
    backend: Backend,
    scenes_dir: str | Path | None = None,
    trace_dir: str | Path = "sessions",
    relation_config: RelationConfig | None = None,
    runtime_config: RuntimeConfig | None = None,
) -> FastAPI:
    relation_config = relation_config or RelationConfig()
    runtime = AgentRuntime(
        backend,
        config=runtime_config or RuntimeConfig(),
        relation_config=relation_config,
    )
    trace_dir = Path(trace_dir)
    app = FastAPI(title="scene alignment service")
    # Single-user tool; the browser UI may be served from any origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    scenes: dict[str, SceneGraph] = {}
    sessions: dict[str, Session] = {}
    app.state.scenes = scenes
    app.state.sessions = sessions

    def ingest_scene(document: dict) -> SceneGraph:
        try:
            graph = graph_from_dict(document)
        except SerializationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if not has_edges_field(document):
            for rel in infer_and_verify(graph, relation_config):
                graph.insert_edge(rel)
            graph.revision = 0
        scenes[graph.scene_id] = graph
        return graph

    if scenes_dir is not None:
        for path in sorted(Path(scenes_dir).glob("*.json")):
            ingest_scene(json.loads(path.read_text(encoding="utf-8")))

    def get_scene(scene_id: str) -> SceneGraph:
        graph = scenes.get(scene_id)
        if graph is None:
            raise HTTPException(status_code=404, detail=f"unknown scene '{scene_id}'")
        return graph

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(
                status_code=404, detail=f"unknown session '{session_id}'"
            )
        return session

    @app.get("/tools")
    def list_tools() -> list[dict]:
        return [
            {
                "name": d.name,
                "params": [{"name": p.name, "kind": p.kind} for p in d.params],
                "description": d.description,
            }
            for d in TOOL_DESCRIPTORS
        ]

    @app.post("/scenes")
    def create_scene(document: dict) -> dict:
        graph = ingest_scene(document)
        return {"scene_id": graph.scene_id}

    @app.get("/scenes/{scene_id}/graph")
    def scene_graph(scene_id: str) -> Response:
        graph = get_scene(scene_id)
        return _canonical_json(
            {"graph": graph_to_dict(graph), "revision": graph.revision}
        )

    @app.post("/scenes/{scene_id}/sessions")
    def create_session(scene_id: str) -> dict:
        graph = get_scene(scene_id)
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = Session(
            session_id=session_id, scene_id=scene_id, graph=graph.clone()
        )
        return {"session_id": session_id, "scene_id": scene_id}

    @app.get("/sessions/{session_id}/graph")
    def session_graph(session_id: str) -> Response:
        session = get_session(session_id)
        return _canonical_json(
            {"graph": graph_to_dict(session.graph), "revision": session.graph.revision}
        )

    @app.post("/sessions/{session_id}/viewer")
    def set_viewer(session_id: str, body: ViewerRequest) -> dict:
        session = get_session(session_id)
        session.viewer = ViewerPose(position=body.position, yaw=body.yaw)
        return {
            "position": list(session.viewer.position),
            "yaw": session.viewer.yaw,
        }

    @app.post("/sessions/{session_id}/mark")
    def mark_object(session_id: str, body: MarkRequest) -> dict:
        session = get_session(session_id)
        try:
            click = Click(object_id=body.object_id, point=body.point)
            toolbox = Toolbox(session.graph, relation_config, click)
            result = toolbox.find_marked_object()
        except GraphError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ToolError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session.current_mark = click
        return {"object_id": result.payload.id, "summary": result.observation.text}

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, body: MessageRequest) -> dict:
        session = get_session(session_id)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409,
                detail="an interaction is already running on this session",
            )
        try:
            interaction_id = uuid.uuid4().hex[:12]
            working = session.graph.clone()
            trace = runtime.run_interaction(
                body.text,
                working,
                mark=session.current_mark,
                interaction_id=interaction_id,
                trace_path=trace_dir / session.session_id / "trace.jsonl",
            )
            session.graph = working
            session.interactions.append(trace)
        finally:
            session.lock.release()
        view = trace_to_dict(trace)
        return {
            "interaction_id": interaction_id,
            "final_response": trace.final_response,
            "status": trace.status,
            "steps": view["steps"],
            "highlights": view["highlights"],
            "graph_revision": session.graph.revision,
            "query_ratio": trace.query_ratio,
        }

    @app.post("/sessions/{session_id}/rate")
    def rate_interaction(session_id: str, body: RateRequest) -> dict:
        session = get_session(session_id)
        if not any(t.interaction_id == body.interaction_id for t in session.interactions):
            raise HTTPException(
                status_code=404,
                detail=f"unknown interaction '{body.interaction_id}'",
            )
        session.ratings[body.interaction_id] = InteractionRating(
            interaction_id=body.interaction_id,
            reasonable=body.reasonable,
            task_success=body.task_success,
        )
        return {"recorded": True}

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> dict:
        session = get_session(session_id)
        metrics = session_metrics(
            session.interactions, tuple(session.ratings.values())
        )
        return dict(metrics_to_dict(metrics))

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> dict:
        session = get_session(session_id)
        lines = [
            json.loads(line)
            for trace in session.interactions
            for line in trace.log_lines
        ]
        return {"lines": lines}

    return app
