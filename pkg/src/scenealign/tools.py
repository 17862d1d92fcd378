"""The eleven agent tools: graph queries, alignment edits, and response
generation. Each tool returns a machine payload plus a rendered observation
for the agent loop; only the four update tools may change the graph.

Tie-breaking everywhere is lowest id, so traces replay identically.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Any, Callable

from .graph import (
    ATTRIBUTE_CATEGORIES,
    GraphError,
    ObjectNode,
    SceneGraph,
    SpatialRelation,
)
from .relations import RelationConfig, is_allocentric, verify
from .rendering import RenderedObservation, render_objects, render_relations

logger = logging.getLogger(__name__)

# Maps user/LLM phrasings onto a stored predicate; swap=True stores the edge
# with endpoints exchanged ("the mug on the table" -> table supports mug).
PREDICATE_ALIASES: dict[str, tuple[str, bool]] = {
    "close": ("close", False),
    "close to": ("close", False),
    "near": ("close", False),
    "next to": ("close", False),
    "far": ("far", False),
    "far from": ("far", False),
    "support": ("support", False),
    "supports": ("support", False),
    "supporting": ("support", False),
    "supported by": ("support", True),
    "supported_by": ("support", True),
    "on": ("support", True),
    "on top of": ("support", True),
    "onto": ("support", True),
    "inside": ("inside", False),
    "in": ("inside", False),
    "within": ("inside", False),
    "contains": ("inside", True),
    "containing": ("inside", True),
    "embed": ("embed", False),
    "embedded": ("embed", False),
    "embedded in": ("embed", False),
    "above": ("above", False),
    "over": ("above", False),
    "below": ("above", True),
    "under": ("above", True),
    "beneath": ("above", True),
    "underneath": ("above", True),
}

KNOWN_COLORS = frozenset(
    "black white gray grey red green blue yellow orange purple pink brown "
    "beige tan cream ivory gold silver bronze cyan magenta maroon navy teal "
    "olive violet turquoise".split()
)
KNOWN_SHAPES = frozenset(
    "round square rectangular circular oval cylindrical spherical cubic flat "
    "curved triangular hexagonal octagonal conical elongated l-shaped "
    "u-shaped".split()
)


class ToolError(Exception):
    """Tool rejection; its message becomes the observation in the loop."""


@dataclass(frozen=True)
class Click:
    """A user mark: either a graph-panel node id or a 3D scene point."""

    object_id: int | None = None
    point: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if (self.object_id is None) == (self.point is None):
            raise ToolError("a click carries exactly one of object_id or point")
        if self.point is not None:
            if len(self.point) != 3 or not all(math.isfinite(v) for v in self.point):
                raise ToolError("click point must be a finite 3-vector")
            object.__setattr__(self, "point", tuple(float(v) for v in self.point))


@dataclass(frozen=True)
class Highlight:
    id: int
    label: str
    centroid: tuple[float, float, float]


@dataclass
class ToolResult:
    payload: Any
    observation: RenderedObservation
    graph_changed: bool = False


@dataclass(frozen=True)
class ToolParam:
    name: str
    kind: str  # string | integer | string list | integer list | point | point list


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    params: tuple[ToolParam, ...]
    description: str

    def signature(self) -> str:
        args = ", ".join(f"{p.name}: {p.kind}" for p in self.params)
        return f"{self.name}({args})"


TOOL_DESCRIPTORS = (
    ToolDescriptor(
        "query_for_objects",
        (ToolParam("query", "string"),),
        "Collect the objects mentioned in a user input.",
    ),
    ToolDescriptor(
        "query_for_relations",
        (ToolParam("object_ids", "integer list"),),
        "Collect the relations associated with a list of objects.",
    ),
    ToolDescriptor(
        "find_marked_object",
        (),
        "Collect the information of the object marked by the user.",
    ),
    ToolDescriptor(
        "calculate_mid_point",
        (ToolParam("points", "point list"),),
        "Calculate the midpoint of a list of Points.",
    ),
    ToolDescriptor(
        "find_object_closest",
        (ToolParam("point", "point"),),
        "Collect the object closest to a point.",
    ),
    ToolDescriptor(
        "update_name",
        (ToolParam("names", "string list"), ToolParam("object_ids", "integer list")),
        "Update the labels of a list of objects.",
    ),
    ToolDescriptor(
        "update_attributes",
        (ToolParam("object_id", "integer"), ToolParam("attributes", "string list")),
        "Update the attributes of an object.",
    ),
    ToolDescriptor(
        "add_relation",
        (
            ToolParam("subject_id", "integer"),
            ToolParam("object_id", "integer"),
            ToolParam("relation", "string"),
        ),
        "Add a relation between two objects.",
    ),
    ToolDescriptor(
        "delete_relation",
        (
            ToolParam("subject_id", "integer"),
            ToolParam("object_id", "integer"),
            ToolParam("relation", "string"),
        ),
        "Remove a relation between two objects.",
    ),
    ToolDescriptor(
        "post_process",
        (ToolParam("object_ids", "integer list"),),
        "Return the relevant information for the GUI.",
    ),
    ToolDescriptor(
        "final_answer",
        (ToolParam("answer", "string"),),
        "Return the final response for the input.",
    ),
)

TOOL_NAMES = tuple(d.name for d in TOOL_DESCRIPTORS)
_DESCRIPTOR_BY_NAME = {d.name: d for d in TOOL_DESCRIPTORS}
MUTATING_TOOLS = frozenset(
    {"update_name", "update_attributes", "add_relation", "delete_relation"}
)


def descriptor(name: str) -> ToolDescriptor:
    desc = _DESCRIPTOR_BY_NAME.get(name)
    if desc is None:
        raise ToolError(
            f"unknown tool '{name}'. Available tools: {', '.join(TOOL_NAMES)}"
        )
    return desc


# -- argument coercion ---------------------------------------------------------


def _want_int(value, name: str) -> int:
    # JSON numbers arrive as int or float; 2.0 means the id 2, 1.5 is an error.
    if isinstance(value, bool):
        raise ToolError(f"parameter '{name}' must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ToolError(f"parameter '{name}' must be an integer")


def _want_str(value, name: str) -> str:
    if not isinstance(value, str):
        raise ToolError(f"parameter '{name}' must be a string")
    return value


def _want_point(value, name: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ToolError(f"parameter '{name}' must be a 3-element point [x, y, z]")
    try:
        point = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ToolError(f"parameter '{name}' must contain only numbers") from None
    if not all(math.isfinite(v) for v in point):
        raise ToolError(f"parameter '{name}' must be finite")
    return point


def _want_list(value, name: str, item: Callable) -> list:
    if not isinstance(value, list):
        raise ToolError(f"parameter '{name}' must be a list")
    return [item(v, name) for v in value]


_COERCERS: dict[str, Callable] = {
    "string": _want_str,
    "integer": _want_int,
    "point": _want_point,
    "string list": lambda v, n: _want_list(v, n, _want_str),
    "integer list": lambda v, n: _want_list(v, n, _want_int),
    "point list": lambda v, n: _want_list(v, n, _want_point),
}


def coerce_arguments(name: str, raw: dict) -> dict:
    desc = descriptor(name)
    if not isinstance(raw, dict):
        raise ToolError(f"action input for '{name}' must be a JSON object")
    known = {p.name for p in desc.params}
    unexpected = set(raw) - known
    if unexpected:
        raise ToolError(
            f"unexpected parameter '{sorted(unexpected)[0]}' for tool '{name}'"
        )
    args = {}
    for param in desc.params:
        if param.name not in raw:
            raise ToolError(
                f"missing required parameter '{param.name}' for tool '{name}'"
            )
        args[param.name] = _COERCERS[param.kind](raw[param.name], param.name)
    return args


# -- the toolbox ---------------------------------------------------------------


class Toolbox:
    """Tools bound to one scene graph and the session's current mark."""

    def __init__(
        self,
        graph: SceneGraph,
        config: RelationConfig | None = None,
        current_mark: Click | None = None,
    ) -> None:
        self.graph = graph
        self.config = config or RelationConfig()
        self.current_mark = current_mark

    def execute(self, name: str, raw_args: dict) -> ToolResult:
        args = coerce_arguments(name, raw_args)
        return getattr(self, name)(**args)

    # -- reasoning tools --------------------------------------------------

    def query_for_objects(self, query: str) -> ToolResult:
        tokens = _tokenize(query)
        candidates = [
            node for node in self.graph.nodes() if _label_matches(node.label, tokens)
        ]
        for token in tokens:
            having = [
                node for node in candidates
                if any(token in values for values in node.attributes.values())
            ]
            if having and len(having) < len(candidates):
                candidates = having
        if not candidates:
            return ToolResult(
                [], RenderedObservation.of(f"No objects matching '{query}' were found.")
            )
        return ToolResult(
            candidates, render_objects([n.id for n in candidates], self.graph)
        )

    def query_for_relations(self, object_ids: list[int]) -> ToolResult:
        relations: set[SpatialRelation] = set()
        for node_id in object_ids:
            relations.update(self.graph.edges_of(node_id, include_inverses=True))
        if not relations:
            return ToolResult(
                [], RenderedObservation.of("No relations were found for the given objects.")
            )
        ordered = sorted(relations)
        return ToolResult(ordered, render_relations(ordered, self.graph))

    def find_marked_object(self) -> ToolResult:
        mark = self.current_mark
        if mark is None:
            raise ToolError("No object is currently marked.")
        if mark.object_id is not None:
            node = self.graph.require_node(mark.object_id)
        else:
            node = self._node_at_point(mark.point)
        return ToolResult(node, render_objects([node.id], self.graph))

    def _node_at_point(self, point: tuple[float, float, float]) -> ObjectNode:
        if len(self.graph) == 0:
            raise ToolError("The scene graph has no objects.")
        containing = [n for n in self.graph.nodes() if n.contains_point(point)]
        if containing:
            return min(containing, key=lambda n: n.id)
        return min(
            self.graph.nodes(),
            key=lambda n: (_distance(n.centroid, point), n.id),
        )

    def calculate_mid_point(self, points: list[tuple[float, float, float]]) -> ToolResult:
        if not points:
            raise ToolError("cannot compute the midpoint of an empty list of points")
        n = len(points)
        mid = tuple(sum(p[i] for p in points) / n for i in range(3))
        return ToolResult(
            mid,
            RenderedObservation.of(
                f"The midpoint of the {n} point(s) is {_format_point(mid)}."
            ),
        )

    def find_object_closest(self, point: tuple[float, float, float]) -> ToolResult:
        if len(self.graph) == 0:
            raise ToolError("The scene graph has no objects.")
        node = min(
            self.graph.nodes(),
            key=lambda n: (_distance(n.centroid, point), n.id),
        )
        return ToolResult(node, render_objects([node.id], self.graph))

    # -- alignment tools ----------------------------------------------------

    def update_name(self, names: list[str], object_ids: list[int]) -> ToolResult:
        if len(names) != len(object_ids):
            raise ToolError(
                f"got {len(names)} names for {len(object_ids)} objects; lengths must match"
            )
        if not names:
            raise ToolError("nothing to rename: empty lists")
        for name in names:
            if not name.strip():
                raise ToolError("labels must be non-empty")
        for node_id in object_ids:
            self.graph.require_node(node_id)
        updated = []
        lines = []
        for name, node_id in zip(names, object_ids):
            node = self.graph.set_label(node_id, name)
            updated.append(node)
            lines.append(f"The object (id: {node.id}) is now labeled '{node.label}'.")
        return ToolResult(
            updated,
            RenderedObservation.of("\n".join(lines), source_ids=tuple(sorted(object_ids))),
            graph_changed=True,
        )

    def update_attributes(self, object_id: int, attributes: list[str]) -> ToolResult:
        self.graph.require_node(object_id)
        if not attributes:
            raise ToolError("no attributes given")
        grouped: dict[str, list[str]] = {}
        for raw in attributes:
            category, value = _parse_attribute(raw)
            grouped.setdefault(category, []).append(value)
        for category, values in grouped.items():
            self.graph.set_attributes(object_id, category, values)
        return ToolResult(
            self.graph.get_node(object_id),
            render_objects([object_id], self.graph),
            graph_changed=True,
        )

    def add_relation(self, subject_id: int, object_id: int, relation: str) -> ToolResult:
        subject = self.graph.require_node(subject_id)
        obj = self.graph.require_node(object_id)
        rel = _normalize_predicate(subject_id, object_id, relation)
        if self.graph.has_edge(rel):
            pair = self.graph.edges_between(subject_id, object_id)
            return ToolResult(
                pair,
                RenderedObservation.of(
                    f"The relation already exists between the {subject.label} "
                    f"(id: {subject_id}) and the {obj.label} (id: {object_id})."
                ),
            )
        self.graph.insert_edge(rel)
        removed = self._verify_pair(subject_id, object_id)
        pair = self.graph.edges_between(subject_id, object_id)
        rendered = render_relations(pair, self.graph) if pair else RenderedObservation.of(
            "The relation was rejected by verification; no relation remains for this pair."
        )
        text = rendered.text
        for removal in removed:
            text += f"\nRemoved conflicting relation {removal.relation.triple()} ({removal.reason})."
        return ToolResult(
            pair,
            RenderedObservation.of(text, rendered.source_ids, rendered.source_edges),
            graph_changed=True,
        )

    def _verify_pair(self, a: int, b: int):
        pair = self.graph.edges_between(a, b)
        cleaned, removed = verify(pair, self.graph, self.config)
        for removal in removed:
            self.graph.remove_edge(removal.relation)
        return removed

    def delete_relation(self, subject_id: int, object_id: int, relation: str) -> ToolResult:
        subject = self.graph.require_node(subject_id)
        obj = self.graph.require_node(object_id)
        rel = _normalize_predicate(subject_id, object_id, relation)
        removed = self.graph.remove_edge(rel)
        pair = self.graph.edges_between(subject_id, object_id)
        if not removed:
            return ToolResult(
                pair,
                RenderedObservation.of(
                    f"No such relation between the {subject.label} (id: {subject_id}) "
                    f"and the {obj.label} (id: {object_id})."
                ),
            )
        if pair:
            rendered = render_relations(pair, self.graph)
            text = "The relation was removed. Remaining relations:\n" + rendered.text
            obs = RenderedObservation.of(text, rendered.source_ids, rendered.source_edges)
        else:
            obs = RenderedObservation.of(
                f"The relation was removed; no relations remain between the "
                f"{subject.label} (id: {subject_id}) and the {obj.label} (id: {object_id})."
            )
        return ToolResult(pair, obs, graph_changed=True)

    # -- response tools -----------------------------------------------------

    def post_process(self, object_ids: list[int]) -> ToolResult:
        seen: set[int] = set()
        highlights = []
        for node_id in object_ids:
            if node_id in seen:
                continue
            seen.add(node_id)
            node = self.graph.require_node(node_id)
            highlights.append(Highlight(node.id, node.label, node.centroid))
        if not highlights:
            return ToolResult([], RenderedObservation.of("No objects to highlight."))
        summary = ", ".join(f"{h.label} (id: {h.id})" for h in highlights)
        return ToolResult(
            highlights,
            RenderedObservation.of(
                f"Highlighted for the interface: {summary}.",
                source_ids=tuple(sorted(seen)),
            ),
        )

    def final_answer(self, answer: str) -> ToolResult:
        if not answer.strip():
            logger.warning("final_answer called with empty text")
            return ToolResult("", RenderedObservation.of("(empty answer)"))
        return ToolResult(answer, RenderedObservation.of(answer))


# -- helpers --------------------------------------------------------------------


def _tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def _token_match(a: str, b: str) -> bool:
    return a == b or a + "s" == b or a == b + "s"


def _label_matches(label: str, query_tokens: list[str]) -> bool:
    label_tokens = label.split()
    return bool(label_tokens) and all(
        any(_token_match(lt, qt) for qt in query_tokens) for lt in label_tokens
    )


def _distance(a: tuple[float, float, float], b: tuple[float, float, float]) -> float:
    return math.dist(a, b)


def _format_point(p: tuple[float, float, float]) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in p) + ")"


def _parse_attribute(raw: str) -> tuple[str, str]:
    if ":" in raw:
        category, _, value = raw.partition(":")
        category = category.strip().lower()
        value = " ".join(value.lower().split())
        if category not in ATTRIBUTE_CATEGORIES:
            raise ToolError(
                f"unknown attribute category '{category}'; "
                f"allowed: {', '.join(ATTRIBUTE_CATEGORIES)}"
            )
        if not value:
            raise ToolError(f"empty value for attribute category '{category}'")
        return category, value
    value = " ".join(raw.lower().split())
    if value in KNOWN_COLORS:
        return "color", value
    if value in KNOWN_SHAPES:
        return "shape", value
    raise ToolError(
        f"cannot infer a category for '{raw}'; state it as 'category: value'"
    )


def _normalize_predicate(subject_id: int, object_id: int, relation: str) -> SpatialRelation:
    key = " ".join(relation.lower().replace("_", " ").split())
    if is_allocentric(relation):
        raise ToolError("viewer-dependent relations are computed, not stored")
    alias = PREDICATE_ALIASES.get(key)
    if alias is None:
        raise ToolError(
            f"unknown relation predicate '{relation}'; "
            "stored relations are close, far, support, inside, embed, above "
            "(and common phrasings such as 'on' or 'below')"
        )
    stored, swap = alias
    s, o = (object_id, subject_id) if swap else (subject_id, object_id)
    if s == o:
        raise ToolError("a relation cannot connect an object to itself")
    try:
        return SpatialRelation(s, stored, o).canonical()
    except GraphError as exc:
        raise ToolError(str(exc)) from exc
