"""Command line entry points: relation inference over a scene file,
batch evaluation, and the HTTP service."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .backends import backend_from_env
from .graph import ViewerPose
from .harness import (
    load_ratings_file,
    metrics_to_dict,
    run_benchmark,
    session_metrics,
    traces_from_jsonl,
)
from .relations import RelationConfig, allocentric, infer_and_verify
from .rendering import deserialize


@click.group()
def main() -> None:
    """Scene graph reasoning and alignment workbench."""


def _load_config(path: str | None) -> RelationConfig:
    if path is None:
        return RelationConfig()
    return RelationConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@main.command()
@click.argument("scene", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Relation threshold overrides (JSON).")
@click.option("--viewer", "viewer_spec", default=None, metavar="X,Y,Z,YAW",
              help="Also print viewer-relative relations for this pose.")
def relations(scene: str, config_path: str | None, viewer_spec: str | None) -> None:
    """Infer and verify spatial relations for SCENE, one triple per line."""
    cfg = _load_config(config_path)
    graph = deserialize(Path(scene).read_text(encoding="utf-8"))
    for rel in infer_and_verify(graph, cfg):
        click.echo(f"{rel.subject_id} {rel.predicate} {rel.object_id}")
    if viewer_spec is not None:
        parts = viewer_spec.split(",")
        if len(parts) != 4:
            raise click.BadParameter("expected X,Y,Z,YAW", param_hint="--viewer")
        try:
            x, y, z, yaw = (float(p) for p in parts)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--viewer") from exc
        pose = ViewerPose((x, y, z), yaw)
        for predicate, node_id in sorted(allocentric(graph, pose, cfg)):
            click.echo(f"viewer {predicate} {node_id}")


@main.group(name="eval")
def eval_group() -> None:
    """Batch evaluation over files."""


@eval_group.command(name="qa")
@click.option("--file", "qa_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--scenes", "scenes_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False))
def eval_qa(qa_file: str, scenes_dir: str, report_path: str | None) -> None:
    """Run QA items through the agent loop and score the answers."""
    backend = backend_from_env()
    report = run_benchmark(qa_file, scenes_dir, backend, report_path=report_path)
    click.echo(json.dumps(report["aggregate"], sort_keys=True, indent=2))


@eval_group.command(name="session")
@click.option("--traces", "traces_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--ratings", "ratings_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def eval_session(traces_dir: str, ratings_path: str | None) -> None:
    """Aggregate alignment metrics from trace logs and a ratings file."""
    traces = []
    for path in sorted(Path(traces_dir).rglob("trace.jsonl")):
        traces.extend(traces_from_jsonl(path))
    ratings = load_ratings_file(ratings_path) if ratings_path else []
    metrics = session_metrics(traces, ratings)
    click.echo(json.dumps(dict(metrics_to_dict(metrics)), sort_keys=True, indent=2))


@main.command()
@click.option("--scenes", "scenes_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--listen", "listen", default="127.0.0.1:8000", metavar="HOST:PORT")
@click.option("--trace-dir", "trace_dir", default="sessions",
              type=click.Path(file_okay=False))
def serve(scenes_dir: str, listen: str, trace_dir: str) -> None:
    """Serve the HTTP API over the scenes in SCENES_DIR."""
    import uvicorn

    from .service import create_app

    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.BadParameter("expected HOST:PORT", param_hint="--listen")
    backend = backend_from_env()
    app = create_app(backend, scenes_dir=scenes_dir, trace_dir=trace_dir)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
