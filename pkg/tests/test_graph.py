from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenealign.graph import (
    GraphError,
    ObjectNode,
    SceneGraph,
    SpatialRelation,
    ViewerPose,
    wrap_angle,
)

from conftest import make_node


def small_graph() -> SceneGraph:
    g = SceneGraph("small")
    g.add_node(make_node(1, "table", centroid=(0, 0, 0.4)))
    g.add_node(make_node(2, "mug", centroid=(0, 0, 1.0)))
    g.add_node(make_node(3, "lamp", centroid=(2, 0, 0.5)))
    return g


class TestObjectNode:
    def test_rejects_negative_id(self):
        with pytest.raises(GraphError):
            make_node(-1)

    def test_rejects_bool_id(self):
        with pytest.raises(GraphError):
            make_node(True)

    def test_rejects_nonpositive_extent(self):
        with pytest.raises(GraphError):
            make_node(1, half=(0.5, 0.0, 0.5))

    def test_label_normalized(self):
        node = make_node(1, "  Coffee   MUG ")
        assert node.label == "coffee mug"

    def test_attribute_values_normalized(self):
        node = make_node(1, attributes={"color": ["  Dark  Blue "]})
        assert node.attributes["color"] == ["dark blue"]

    def test_unknown_attribute_category_rejected(self):
        with pytest.raises(GraphError):
            make_node(1, attributes={"smell": ["minty"]})

    def test_bounds_and_containment(self):
        node = make_node(1, centroid=(1.0, 2.0, 3.0), half=(0.5, 1.0, 1.5))
        assert node.lower == (0.5, 1.0, 1.5)
        assert node.upper == (1.5, 3.0, 4.5)
        assert node.contains_point((1.0, 2.0, 3.0))
        assert node.contains_point((0.5, 1.0, 1.5))  # faces are inclusive
        assert not node.contains_point((2.0, 2.0, 3.0))


class TestSpatialRelation:
    def test_rejects_self_relation(self):
        with pytest.raises(GraphError):
            SpatialRelation(2, "above", 2)

    def test_allocentric_predicate_cannot_be_stored(self):
        rel = SpatialRelation(1, "left", 2)  # transient value is fine
        with pytest.raises(GraphError):
            rel.canonical()
        g = small_graph()
        with pytest.raises(GraphError):
            g.insert_edge(SpatialRelation(1, "in_front", 2))

    def test_rejects_unknown_predicate(self):
        with pytest.raises(GraphError):
            SpatialRelation(1, "hovering", 2)

    def test_inverse_normalizes_to_stored(self):
        assert SpatialRelation(1, "below", 2).canonical().triple() == (2, "above", 1)
        assert SpatialRelation(1, "supported_by", 2).canonical().triple() == (2, "support", 1)
        assert SpatialRelation(1, "contains", 2).canonical().triple() == (2, "inside", 1)

    def test_symmetric_ordered_by_id(self):
        assert SpatialRelation(5, "close", 2).canonical().triple() == (2, "close", 5)
        assert SpatialRelation(5, "far", 2).canonical().triple() == (2, "far", 5)


class TestSceneGraph:
    def test_add_node_bumps_revision(self):
        g = SceneGraph("s")
        assert g.revision == 0
        g.add_node(make_node(0))
        assert len(g) == 1
        assert g.revision == 1

    def test_duplicate_id_rejected_naming_it(self):
        g = SceneGraph("s")
        g.add_node(make_node(0))
        with pytest.raises(GraphError, match="0"):
            g.add_node(make_node(0))

    def test_get_node_absent_is_none(self):
        g = small_graph()
        assert g.get_node(999) is None
        g.remove_node(3)
        assert g.get_node(3) is None

    def test_edges_of_includes_inverse_for_object_side(self):
        g = small_graph()
        g.insert_edge(SpatialRelation(1, "support", 2))
        assert [r.triple() for r in g.edges_of(2, include_inverses=True)] == [
            (1, "support", 2),
            (2, "supported_by", 1),
        ]

    def test_edges_of_isolated_node_empty(self):
        g = small_graph()
        assert g.edges_of(3) == []

    def test_edges_of_unknown_id_raises(self):
        g = small_graph()
        with pytest.raises(GraphError):
            g.edges_of(999)

    def test_symmetric_insert_canonicalizes(self):
        a, b = small_graph(), small_graph()
        a.insert_edge(SpatialRelation(3, "close", 1))
        b.insert_edge(SpatialRelation(1, "close", 3))
        assert a.edges_of(3) == b.edges_of(3)

    def test_duplicate_edge_rejected(self):
        g = small_graph()
        g.insert_edge(SpatialRelation(1, "support", 2))
        with pytest.raises(GraphError):
            g.insert_edge(SpatialRelation(2, "supported_by", 1))

    def test_set_label_read_your_writes(self):
        g = small_graph()
        g.set_label(2, "coffee mug")
        assert g.get_node(2).label == "coffee mug"

    def test_remove_node_cascades_edges(self):
        g = small_graph()
        g.insert_edge(SpatialRelation(1, "support", 2))
        g.insert_edge(SpatialRelation(2, "close", 3))
        g.remove_node(2)
        assert g.get_node(2) is None
        assert g.edges() == []
        g.validate()

    def test_remove_edge_returns_presence(self):
        g = small_graph()
        g.insert_edge(SpatialRelation(1, "support", 2))
        assert g.remove_edge(SpatialRelation(2, "supported_by", 1)) is True
        assert g.remove_edge(SpatialRelation(1, "support", 2)) is False

    def test_clone_is_independent(self):
        g = small_graph()
        g.insert_edge(SpatialRelation(1, "support", 2))
        copy = g.clone()
        copy.set_label(1, "desk")
        copy.remove_edge(SpatialRelation(1, "support", 2))
        assert g.get_node(1).label == "table"
        assert len(g.edges()) == 1

    def test_equality_ignores_revision(self):
        g, h = small_graph(), small_graph()
        h.set_label(1, "table")  # no-op rename still bumps revision
        assert g == h
        h.set_label(1, "desk")
        assert g != h


# Random mutation sequences: the structural invariants must hold after
# every prefix (no dangling edges, validate passes, reads see writes).
@st.composite
def mutation_sequences(draw):
    ops = draw(
        st.lists(
            st.tuples(
                st.sampled_from(["add", "label", "edge", "rm_edge", "rm_node"]),
                st.integers(0, 7),
                st.integers(0, 7),
            ),
            max_size=30,
        )
    )
    return ops


@given(mutation_sequences())
@settings(max_examples=100)
def test_mutation_sequences_keep_invariants(ops):
    g = SceneGraph("fuzz")
    for kind, a, b in ops:
        try:
            if kind == "add":
                g.add_node(make_node(a, centroid=(a, b, 1.0)))
            elif kind == "label":
                g.set_label(a, f"label {b}")
                assert g.get_node(a).label == f"label {b}"
            elif kind == "edge":
                g.insert_edge(SpatialRelation(a, "close", b))
            elif kind == "rm_edge":
                g.remove_edge(SpatialRelation(a, "close", b))
            elif kind == "rm_node":
                g.remove_node(a)
                assert g.get_node(a) is None
        except GraphError:
            pass
        g.validate()
        ids = set(g.node_ids())
        for rel in g.edges():
            assert rel.subject_id in ids and rel.object_id in ids


class TestViewerPose:
    def test_yaw_wraps_into_range(self):
        assert ViewerPose(yaw=math.tau + 0.25).yaw == pytest.approx(0.25)
        assert -math.pi <= ViewerPose(yaw=math.pi).yaw < math.pi

    def test_wrap_angle_range(self):
        for theta in (-10.0, -math.pi, 0.0, 3.0, math.pi, 100.0):
            assert -math.pi <= wrap_angle(theta) < math.pi

    def test_wrap_angle_identity_inside_range(self):
        assert wrap_angle(1.0) == 1.0
        assert wrap_angle(-2.0) == -2.0
