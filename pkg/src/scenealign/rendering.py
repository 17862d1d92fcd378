"""Text rendering of graphs into LLM observations, the canonical JSON
persistence format, and whitespace-token accounting for the query ratio.

Tokens are whitespace-delimited runs, not model subword tokens: the query
ratio is a ratio, so any consistent tokenizer compares, and whitespace is
reproducible everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .graph import (
    ATTRIBUTE_CATEGORIES,
    STORED_PREDICATES,
    GraphError,
    ObjectNode,
    SceneGraph,
    SpatialRelation,
)

PREDICATE_PHRASES = {
    "close": "close to",
    "far": "far from",
    "support": "supporting",
    "inside": "inside",
    "embed": "embedded in",
    "above": "above",
    "below": "below",
    "supported_by": "supported by",
    "contains": "containing",
    "in_front": "in front of",
    "behind": "behind",
    "left": "to the left of",
    "right": "to the right of",
}


class SerializationError(ValueError):
    """Malformed or schema-violating scene document."""


@dataclass(frozen=True)
class RenderedObservation:
    """A rendered observation plus the graph content it covers."""

    text: str
    token_count: int
    source_ids: tuple[int, ...] = ()
    source_edges: tuple[SpatialRelation, ...] = ()

    @classmethod
    def of(
        cls,
        text: str,
        source_ids: tuple[int, ...] = (),
        source_edges: tuple[SpatialRelation, ...] = (),
    ) -> RenderedObservation:
        return cls(text, len(text.split()), source_ids, source_edges)


def render_objects(ids, g: SceneGraph) -> RenderedObservation:
    """One sentence per object, ordered by id:
    ``The {label} (id: {id}) has attributes: {attributes}.``"""
    unique = sorted(set(ids))
    lines = []
    for node_id in unique:
        node = g.require_node(node_id)
        lines.append(
            f"The {node.label} (id: {node.id}) has attributes: {_attribute_text(node)}."
        )
    return RenderedObservation.of("\n".join(lines), source_ids=tuple(unique))


def _attribute_text(node: ObjectNode) -> str:
    parts = [
        f"{category}: {', '.join(node.attributes[category])}"
        for category in ATTRIBUTE_CATEGORIES
        if node.attributes.get(category)
    ]
    return "; ".join(parts) if parts else "none"


def render_relations(rels, g: SceneGraph) -> RenderedObservation:
    """One sentence per relation, sorted by (subject, predicate, object):
    ``The {subject.label} (id: {sid}) is {phrase} the {object.label} (id: {oid}).``"""
    unique = sorted(set(rels))
    lines = []
    ids: set[int] = set()
    edges: set[SpatialRelation] = set()
    for rel in unique:
        subject = g.require_node(rel.subject_id)
        obj = g.require_node(rel.object_id)
        phrase = PREDICATE_PHRASES.get(rel.predicate)
        if phrase is None:
            raise GraphError(f"no rendering phrase for predicate {rel.predicate!r}")
        lines.append(
            f"The {subject.label} (id: {subject.id}) is {phrase} "
            f"the {obj.label} (id: {obj.id})."
        )
        ids.update((subject.id, obj.id))
        if rel.predicate in STORED_PREDICATES or rel.predicate in ("below", "supported_by", "contains"):
            edges.add(rel.canonical())
    return RenderedObservation.of(
        "\n".join(lines),
        source_ids=tuple(sorted(ids)),
        source_edges=tuple(sorted(edges)),
    )


# -- persistence --------------------------------------------------------------


def graph_to_dict(g: SceneGraph) -> dict:
    return {
        "scene_id": g.scene_id,
        "objects": [
            {
                "id": n.id,
                "label": n.label,
                "centroid": list(n.centroid),
                "half_extents": list(n.half_extents),
                "attributes": {k: list(v) for k, v in sorted(n.attributes.items())},
            }
            for n in g.nodes()
        ],
        "edges": [
            {"subject": e.subject_id, "predicate": e.predicate, "object": e.object_id}
            for e in g.edges()
        ],
    }


def serialize(g: SceneGraph) -> str:
    """Canonical text form: sorted keys and ids, so equal graphs are
    byte-identical."""
    return json.dumps(graph_to_dict(g), sort_keys=True, indent=2) + "\n"


def deserialize(text: str) -> SceneGraph:
    """Parse a scene document; revision of the result is 0."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SerializationError(
            f"malformed document at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return graph_from_dict(data)


def graph_from_dict(data) -> SceneGraph:
    if not isinstance(data, dict):
        raise SerializationError("scene document must be a JSON object")
    scene_id = data.get("scene_id")
    if not isinstance(scene_id, str) or not scene_id:
        raise SerializationError("scene_id must be non-empty text")
    objects = data.get("objects")
    if not isinstance(objects, list):
        raise SerializationError("objects must be a list")

    g = SceneGraph(scene_id)
    for i, raw in enumerate(objects):
        if not isinstance(raw, dict):
            raise SerializationError(f"objects[{i}] must be an object")
        try:
            node = ObjectNode(
                id=raw.get("id"),
                label=raw.get("label"),
                centroid=raw.get("centroid"),
                half_extents=raw.get("half_extents"),
                attributes=raw.get("attributes") or {},
            )
            g.add_node(node)
        except GraphError as exc:
            raise SerializationError(f"objects[{i}]: {exc}") from exc

    edges = data.get("edges")
    if edges is not None:
        if not isinstance(edges, list):
            raise SerializationError("edges must be a list")
        for i, raw in enumerate(edges):
            if not isinstance(raw, dict):
                raise SerializationError(f"edges[{i}] must be an object")
            try:
                rel = SpatialRelation(
                    raw.get("subject"), str(raw.get("predicate")), raw.get("object")
                )
            except (GraphError, TypeError) as exc:
                raise SerializationError(f"edges[{i}]: {exc}") from exc
            for endpoint in (rel.subject_id, rel.object_id):
                if g.get_node(endpoint) is None:
                    raise SerializationError(f"edges[{i}]: dangling edge to unknown id {endpoint}")
            try:
                g.insert_edge(rel)
            except GraphError as exc:
                raise SerializationError(f"edges[{i}]: {exc}") from exc

    g.revision = 0
    return g


def has_edges_field(text_or_data) -> bool:
    data = json.loads(text_or_data) if isinstance(text_or_data, str) else text_or_data
    return isinstance(data, dict) and data.get("edges") is not None


# -- query ratio --------------------------------------------------------------


@dataclass
class RetrievalLedger:
    """Union of graph content touched by an interaction's observations."""

    ids: set[int] = field(default_factory=set)
    edges: set[SpatialRelation] = field(default_factory=set)

    def record(self, obs: RenderedObservation) -> None:
        self.ids.update(obs.source_ids)
        self.edges.update(obs.source_edges)


def query_ratio(observations, g: SceneGraph) -> float | None:
    """Tokens of the deduplicated retrieved sub-graph rendering over tokens
    of the full-graph rendering; None for an empty graph."""
    if len(g) == 0:
        return None
    ledger = RetrievalLedger()
    for obs in observations:
        ledger.record(obs)
    live_ids = sorted(i for i in ledger.ids if g.get_node(i) is not None)
    live_edges = sorted(
        e for e in ledger.edges
        if g.get_node(e.subject_id) is not None and g.get_node(e.object_id) is not None
    )
    numerator = (
        render_objects(live_ids, g).token_count
        + render_relations(live_edges, g).token_count
    )
    denominator = (
        render_objects(g.node_ids(), g).token_count
        + render_relations(g.edges(), g).token_count
    )
    if denominator == 0:
        return None
    return min(1.0, max(0.0, numerator / denominator))
