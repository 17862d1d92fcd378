"""Scene-graph reasoning and human-alignment workbench.

A 3D scene is a graph of labeled boxes with attributes and spatial
relations. An LLM-driven agent answers questions about it through a
small toolset and, guided by user corrections, edits the graph so later
tasks benefit from the aligned representation.
"""

from .graph import (
    GraphError,
    ObjectNode,
    SceneGraph,
    SpatialRelation,
    ViewerPose,
)
from .relations import RelationConfig, allocentric, infer_and_verify, infer_relations, verify
from .rendering import deserialize, query_ratio, render_objects, render_relations, serialize

__all__ = [
    "GraphError",
    "ObjectNode",
    "RelationConfig",
    "SceneGraph",
    "SpatialRelation",
    "ViewerPose",
    "allocentric",
    "deserialize",
    "infer_and_verify",
    "infer_relations",
    "query_ratio",
    "render_objects",
    "render_relations",
    "serialize",
    "verify",
]
