"""Scene graph data model: object nodes, spatial relation edges, and the
mutation/query primitives every other module goes through.

Coordinates are meters in a z-up scene frame. Boxes are axis-aligned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

ATTRIBUTE_CATEGORIES = ("color", "texture", "shape", "material", "affordance")

# Predicates that may be stored as edges. Symmetric ones are canonicalized
# with subject_id < object_id; directional ones read back with an inverse.
STORED_PREDICATES = frozenset({"close", "far", "support", "inside", "embed", "above"})
SYMMETRIC_PREDICATES = frozenset({"close", "far"})
INVERSE_OF = {"above": "below", "support": "supported_by", "inside": "contains"}
DERIVED_INVERSES = {v: k for k, v in INVERSE_OF.items()}

# Viewer-dependent predicates: computed on demand, never stored.
ALLOCENTRIC_PREDICATES = frozenset({"left", "right", "in_front", "behind"})


class GraphError(ValueError):
    """Rejection of a graph mutation or query that violates an invariant."""


def _as_vec3(value, what: str) -> tuple[float, float, float]:
    try:
        x, y, z = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise GraphError(f"{what} must be a 3-vector of numbers") from exc
    for v in (x, y, z):
        if not math.isfinite(v):
            raise GraphError(f"{what} must be finite")
    return (x, y, z)


@dataclass
class ObjectNode:
    """One 3D object instance: id, label, axis-aligned box, attributes."""

    id: int
    label: str
    centroid: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    attributes: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 0:
            raise GraphError(f"node id must be a non-negative integer, got {self.id!r}")
        self.label = _normalize_label(self.label)
        self.centroid = _as_vec3(self.centroid, "centroid")
        self.half_extents = _as_vec3(self.half_extents, "half_extents")
        if any(h <= 0 for h in self.half_extents):
            raise GraphError(
                f"half_extents must be strictly positive, got {self.half_extents} for node {self.id}"
            )
        self.attributes = _normalize_attributes(self.attributes, self.id)

    @property
    def lower(self) -> tuple[float, float, float]:
        c, h = self.centroid, self.half_extents
        return (c[0] - h[0], c[1] - h[1], c[2] - h[2])

    @property
    def upper(self) -> tuple[float, float, float]:
        c, h = self.centroid, self.half_extents
        return (c[0] + h[0], c[1] + h[1], c[2] + h[2])

    def contains_point(self, point: tuple[float, float, float]) -> bool:
        lo, hi = self.lower, self.upper
        return all(lo[i] <= point[i] <= hi[i] for i in range(3))

    def copy(self) -> ObjectNode:
        return ObjectNode(
            id=self.id,
            label=self.label,
            centroid=self.centroid,
            half_extents=self.half_extents,
            attributes={k: list(v) for k, v in self.attributes.items()},
        )


def _normalize_label(label) -> str:
    if not isinstance(label, str) or not label.strip():
        raise GraphError("label must be non-empty text")
    return " ".join(label.lower().split())


def _normalize_attributes(attributes, node_id: int) -> dict[str, list[str]]:
    if not isinstance(attributes, dict):
        raise GraphError(f"attributes of node {node_id} must be a mapping")
    out: dict[str, list[str]] = {}
    for category, values in attributes.items():
        if category not in ATTRIBUTE_CATEGORIES:
            raise GraphError(
                f"unknown attribute category {category!r} on node {node_id}; "
                f"allowed: {', '.join(ATTRIBUTE_CATEGORIES)}"
            )
        if isinstance(values, str):
            values = [values]
        cleaned = []
        for v in values:
            if not isinstance(v, str) or not v.strip():
                raise GraphError(f"attribute values of node {node_id} must be non-empty text")
            cleaned.append(" ".join(v.lower().split()))
        if cleaned:
            out[category] = cleaned
    return out


@dataclass(frozen=True, order=True)
class SpatialRelation:
    """Directed labeled edge (subject, predicate, object) between node ids."""

    subject_id: int
    predicate: str
    object_id: int

    def __post_init__(self) -> None:
        known = STORED_PREDICATES | set(DERIVED_INVERSES) | ALLOCENTRIC_PREDICATES
        if self.predicate not in known:
            raise GraphError(f"unknown predicate {self.predicate!r}")
        if self.subject_id == self.object_id:
            raise GraphError(f"self-relation on node {self.subject_id} is not allowed")

    def canonical(self) -> SpatialRelation:
        """Stored form: symmetric edges ordered subject < object, derived
        inverses rewritten to their stored predicate with endpoints swapped."""
        pred, s, o = self.predicate, self.subject_id, self.object_id
        if pred in DERIVED_INVERSES:
            pred, s, o = DERIVED_INVERSES[pred], o, s
        if pred in SYMMETRIC_PREDICATES and s > o:
            s, o = o, s
        if pred not in STORED_PREDICATES:
            raise GraphError(f"predicate {pred!r} cannot be stored")
        return SpatialRelation(s, pred, o)

    def triple(self) -> tuple[int, str, int]:
        return (self.subject_id, self.predicate, self.object_id)


class SceneGraph:
    """Mutable scene graph. Every mutation bumps ``revision``; queries never do.

    One graph is owned by one session at a time; callers serialize access.
    """

    def __init__(self, scene_id: str = "") -> None:
        self.scene_id = scene_id
        self._nodes: dict[int, ObjectNode] = {}
        self._edges: set[SpatialRelation] = set()
        self.revision = 0

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    def nodes(self) -> list[ObjectNode]:
        return [self._nodes[i] for i in sorted(self._nodes)]

    def get_node(self, node_id: int) -> ObjectNode | None:
        return self._nodes.get(node_id)

    def require_node(self, node_id: int) -> ObjectNode:
        node = self._nodes.get(node_id)
        if node is None:
            raise GraphError(f"unknown node id {node_id}")
        return node

    def edges(self) -> list[SpatialRelation]:
        return sorted(self._edges)

    def has_edge(self, rel: SpatialRelation) -> bool:
        return rel.canonical() in self._edges

    def edges_of(self, node_id: int, include_inverses: bool = False) -> list[SpatialRelation]:
        """All stored edges touching ``node_id``. With ``include_inverses``,
        directional edges pointing at the node are additionally rendered with
        the inverse predicate; symmetric edges are returned once."""
        self.require_node(node_id)
        touching = sorted(
            e for e in self._edges if node_id in (e.subject_id, e.object_id)
        )
        if not include_inverses:
            return touching
        inverses = [
            SpatialRelation(e.object_id, INVERSE_OF[e.predicate], e.subject_id)
            for e in touching
            if e.object_id == node_id and e.predicate in INVERSE_OF
        ]
        return touching + sorted(inverses)

    def edges_between(self, a: int, b: int) -> list[SpatialRelation]:
        return sorted(
            e for e in self._edges
            if {e.subject_id, e.object_id} == {a, b}
        )

    # -- mutations ----------------------------------------------------------

    def _bump(self) -> None:
        self.revision += 1

    def add_node(self, node: ObjectNode) -> None:
        if node.id in self._nodes:
            raise GraphError(f"duplicate node id {node.id}")
        self._nodes[node.id] = node
        self._bump()

    def set_label(self, node_id: int, label: str) -> ObjectNode:
        node = self.require_node(node_id)
        node.label = _normalize_label(label)
        self._bump()
        return node

    def set_attributes(self, node_id: int, category: str, values: list[str]) -> ObjectNode:
        node = self.require_node(node_id)
        normalized = _normalize_attributes({category: values}, node_id)
        if category in normalized:
            node.attributes[category] = normalized[category]
        else:
            node.attributes.pop(category, None)
        self._bump()
        return node

    def insert_edge(self, rel: SpatialRelation) -> SpatialRelation:
        rel = rel.canonical()
        self.require_node(rel.subject_id)
        self.require_node(rel.object_id)
        if rel in self._edges:
            raise GraphError(f"edge {rel.triple()} already present")
        self._edges.add(rel)
        self._bump()
        return rel

    def remove_edge(self, rel: SpatialRelation) -> bool:
        rel = rel.canonical()
        if rel not in self._edges:
            return False
        self._edges.discard(rel)
        self._bump()
        return True

    def remove_node(self, node_id: int) -> None:
        self.require_node(node_id)
        del self._nodes[node_id]
        # Cascade: a deleted node must leave no dangling edges behind.
        self._edges = {
            e for e in self._edges if node_id not in (e.subject_id, e.object_id)
        }
        self._bump()

    # -- consistency --------------------------------------------------------

    def validate(self) -> None:
        """Check all structural invariants; raises GraphError on the first hit."""
        for e in self._edges:
            if e.predicate not in STORED_PREDICATES:
                raise GraphError(f"stored edge with non-canonical predicate {e.predicate!r}")
            if e.subject_id not in self._nodes or e.object_id not in self._nodes:
                raise GraphError(f"dangling edge {e.triple()}")
            if e.predicate in SYMMETRIC_PREDICATES and e.subject_id > e.object_id:
                raise GraphError(f"symmetric edge {e.triple()} not canonically ordered")

    def clone(self) -> SceneGraph:
        g = SceneGraph(self.scene_id)
        g._nodes = {i: n.copy() for i, n in self._nodes.items()}
        g._edges = set(self._edges)
        g.revision = self.revision
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, SceneGraph):
            return NotImplemented
        return (
            self.scene_id == other.scene_id
            and self._nodes == other._nodes
            and self._edges == other._edges
        )


@dataclass
class ViewerPose:
    """Viewer position and heading; yaw is counterclockwise about z with
    0 facing +y, normalized to [-pi, pi)."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw: float = 0.0

    def __post_init__(self) -> None:
        self.position = _as_vec3(self.position, "position")
        self.yaw = wrap_angle(float(self.yaw))


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    wrapped = math.remainder(theta, math.tau)
    if wrapped >= math.pi:  # remainder can return exactly +pi
        wrapped -= math.tau
    return wrapped
