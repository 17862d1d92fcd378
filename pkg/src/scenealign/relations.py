"""Spatial relation inference from axis-aligned boxes, viewer-dependent
allocentric relations, and the automatic verification pass that cleans an
edge set.

All thresholds live in RelationConfig; defaults are tuned for indoor scenes
at meter scale. Inference is deterministic: identical graph and config give
an identical, insertion-order-independent edge set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .graph import (
    ALLOCENTRIC_PREDICATES,
    SYMMETRIC_PREDICATES,
    GraphError,
    ObjectNode,
    SceneGraph,
    SpatialRelation,
    ViewerPose,
    wrap_angle,
)

# Higher wins; at most one vertical predicate is kept per ordered pair.
VERTICAL_PRECEDENCE = {"inside": 3, "embed": 2, "support": 1, "above": 0}


@dataclass
class RelationConfig:
    close_max: float = 1.5          # meters; gap_xy <= close_max -> close
    far_min: float = 3.0            # meters; gap_xy >= far_min -> far
    contact_eps: float = 0.05       # meters; vertical contact tolerance
    overlap_min: float = 0.25       # footprint overlap ratio (vs smaller footprint)
    inside_min: float = 0.9         # containment ratio for "inside"
    embed_min: float = 0.3          # containment band for "embed"
    embed_max: float = 0.9
    sector_half_angle: float = math.pi / 4  # radians; allocentric sector half-width

    def __post_init__(self) -> None:
        if not self.close_max < self.far_min:
            raise ValueError("close_max must be < far_min")
        if not (self.embed_min < self.embed_max <= self.inside_min):
            raise ValueError("need embed_min < embed_max <= inside_min")
        for name in ("close_max", "far_min", "contact_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 <= self.overlap_min <= 1:
            raise ValueError("overlap_min must be in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> RelationConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# -- box geometry helpers -----------------------------------------------------


def _footprint_gap(a: ObjectNode, b: ObjectNode) -> float:
    """Horizontal distance between box footprints; 0 if they overlap."""
    alo, ahi, blo, bhi = a.lower, a.upper, b.lower, b.upper
    dx = max(alo[0] - bhi[0], blo[0] - ahi[0], 0.0)
    dy = max(alo[1] - bhi[1], blo[1] - ahi[1], 0.0)
    return math.hypot(dx, dy)


def _footprint_overlap_ratio(a: ObjectNode, b: ObjectNode) -> float:
    """Footprint intersection area over the smaller footprint's area."""
    alo, ahi, blo, bhi = a.lower, a.upper, b.lower, b.upper
    w = min(ahi[0], bhi[0]) - max(alo[0], blo[0])
    d = min(ahi[1], bhi[1]) - max(alo[1], blo[1])
    if w <= 0 or d <= 0:
        return 0.0
    area_a = (ahi[0] - alo[0]) * (ahi[1] - alo[1])
    area_b = (bhi[0] - blo[0]) * (bhi[1] - blo[1])
    return (w * d) / min(area_a, area_b)


def _containment(a: ObjectNode, b: ObjectNode) -> float:
    """volume(a intersect b) / volume(a)."""
    alo, ahi, blo, bhi = a.lower, a.upper, b.lower, b.upper
    inter = 1.0
    vol_a = 1.0
    for i in range(3):
        side = min(ahi[i], bhi[i]) - max(alo[i], blo[i])
        if side <= 0:
            return 0.0
        inter *= side
        vol_a *= ahi[i] - alo[i]
    return inter / vol_a


def _vertical_overlap(a: ObjectNode, b: ObjectNode) -> bool:
    return min(a.upper[2], b.upper[2]) - max(a.lower[2], b.lower[2]) > 0


def _supports(a: ObjectNode, b: ObjectNode, cfg: RelationConfig) -> bool:
    """a supports b: overlapping footprints, a's top touching b's bottom, a below."""
    return (
        _footprint_overlap_ratio(a, b) >= cfg.overlap_min
        and abs(a.upper[2] - b.lower[2]) <= cfg.contact_eps
        and a.centroid[2] < b.centroid[2]
    )


def _is_above(a: ObjectNode, b: ObjectNode, cfg: RelationConfig) -> bool:
    """a above b: overlapping footprints with clear air between them."""
    return (
        _footprint_overlap_ratio(a, b) >= cfg.overlap_min
        and a.lower[2] - b.upper[2] > cfg.contact_eps
    )


def _vertical_predicate(a: ObjectNode, b: ObjectNode, cfg: RelationConfig) -> str | None:
    """Highest-precedence vertical predicate for the ordered pair (a, b)."""
    containment = _containment(a, b)
    if containment >= cfg.inside_min:
        return "inside"
    if cfg.embed_min <= containment < cfg.embed_max and _vertical_overlap(a, b):
        return "embed"
    if _supports(a, b, cfg):
        return "support"
    if _is_above(a, b, cfg):
        return "above"
    return None


# -- inference ----------------------------------------------------------------


def infer_relations(g: SceneGraph, cfg: RelationConfig | None = None) -> list[SpatialRelation]:
    """Traverse all node pairs and emit the stored-canonical relation set."""
    cfg = cfg or RelationConfig()
    nodes = g.nodes()
    relations: list[SpatialRelation] = []
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            gap = _footprint_gap(a, b)
            if gap <= cfg.close_max:
                relations.append(SpatialRelation(a.id, "close", b.id))
            elif gap >= cfg.far_min:
                relations.append(SpatialRelation(a.id, "far", b.id))
            for sub, obj in ((a, b), (b, a)):
                pred = _vertical_predicate(sub, obj, cfg)
                if pred is not None:
                    relations.append(SpatialRelation(sub.id, pred, obj.id))
    return sorted(relations)


# -- allocentric --------------------------------------------------------------


def allocentric(
    g: SceneGraph,
    viewer: ViewerPose,
    cfg: RelationConfig | None = None,
    subject_id: int | None = None,
) -> list[tuple[str, int]]:
    """Classify every node (other than ``subject_id``) into one directional
    sector relative to the viewer's position and heading.

    Results are computed on demand and never written into the graph. A node
    with zero horizontal offset from the viewer is omitted.
    """
    cfg = cfg or RelationConfig()
    if subject_id is not None:
        g.require_node(subject_id)
    # Forward axis in the scene frame; yaw 0 faces +y, counterclockwise about z.
    fx, fy = -math.sin(viewer.yaw), math.cos(viewer.yaw)
    cos_sector = math.cos(cfg.sector_half_angle)
    out: list[tuple[str, int]] = []
    for node in g.nodes():
        if node.id == subject_id:
            continue
        ox = node.centroid[0] - viewer.position[0]
        oy = node.centroid[1] - viewer.position[1]
        norm = math.hypot(ox, oy)
        if norm == 0.0:
            continue
        ahead = fx * ox + fy * oy
        # |theta| <= sector <=> cos(theta) >= cos(sector); avoids atan2 wrapping.
        if ahead >= norm * cos_sector:
            pred = "in_front"
        elif -ahead >= norm * cos_sector:
            pred = "behind"
        elif fx * oy - fy * ox > 0:
            pred = "left"
        else:
            pred = "right"
        out.append((pred, node.id))
    return out


# -- verification -------------------------------------------------------------


@dataclass(frozen=True)
class Removal:
    relation: SpatialRelation
    reason: str


def verify(
    relations: list[SpatialRelation],
    g: SceneGraph,
    cfg: RelationConfig | None = None,
) -> tuple[list[SpatialRelation], list[Removal]]:
    """Rectify an edge set: drop self-relations, duplicates, shadowed vertical
    predicates, contradictory above/above pairs, close/far conflicts, and
    support edges whose geometry no longer shows contact."""
    cfg = cfg or RelationConfig()
    removals: list[Removal] = []
    kept: list[SpatialRelation] = []

    seen: set[tuple[int, str, int]] = set()
    for rel in relations:
        if rel.subject_id == rel.object_id:
            removals.append(Removal(rel, "self-relation"))
            continue
        rel = rel.canonical()
        if rel.triple() in seen:
            removals.append(Removal(rel, "duplicate"))
            continue
        seen.add(rel.triple())
        kept.append(rel)

    # Per ordered pair keep only the highest-precedence vertical predicate.
    best: dict[tuple[int, int], int] = {}
    for rel in kept:
        rank = VERTICAL_PRECEDENCE.get(rel.predicate)
        if rank is None:
            continue
        key = (rel.subject_id, rel.object_id)
        best[key] = max(best.get(key, -1), rank)
    survivors = []
    for rel in kept:
        rank = VERTICAL_PRECEDENCE.get(rel.predicate)
        if rank is not None and rank < best[(rel.subject_id, rel.object_id)]:
            removals.append(Removal(rel, "shadowed by higher-precedence vertical predicate"))
        else:
            survivors.append(rel)
    kept = survivors

    # (a above b) and (b above a) cannot both hold; drop the geometrically wrong one.
    above = {(r.subject_id, r.object_id) for r in kept if r.predicate == "above"}
    survivors = []
    for rel in kept:
        if rel.predicate == "above" and (rel.object_id, rel.subject_id) in above:
            za = _centroid_z(g, rel.subject_id)
            zb = _centroid_z(g, rel.object_id)
            if za is not None and zb is not None and za <= zb:
                removals.append(Removal(rel, "contradictory above pair"))
                continue
        survivors.append(rel)
    kept = survivors

    # close and far for the same pair: keep the one consistent with gap_xy.
    by_pair: dict[tuple[int, int], set[str]] = {}
    for rel in kept:
        if rel.predicate in SYMMETRIC_PREDICATES:
            by_pair.setdefault((rel.subject_id, rel.object_id), set()).add(rel.predicate)
    survivors = []
    for rel in kept:
        if rel.predicate in SYMMETRIC_PREDICATES:
            pair = (rel.subject_id, rel.object_id)
            if by_pair[pair] == {"close", "far"}:
                gap = _pair_gap(g, *pair)
                consistent = (
                    gap is not None
                    and (
                        (rel.predicate == "close" and gap <= cfg.close_max)
                        or (rel.predicate == "far" and gap >= cfg.far_min)
                    )
                )
                if not consistent:
                    removals.append(Removal(rel, "close/far conflict"))
                    continue
        survivors.append(rel)
    kept = survivors

    # Support claims must still satisfy the geometric contact condition.
    survivors = []
    for rel in kept:
        if rel.predicate == "support":
            a = g.get_node(rel.subject_id)
            b = g.get_node(rel.object_id)
            if a is not None and b is not None and not _supports(a, b, cfg):
                removals.append(Removal(rel, "support without contact"))
                continue
        survivors.append(rel)

    return sorted(survivors), removals


def _centroid_z(g: SceneGraph, node_id: int) -> float | None:
    node = g.get_node(node_id)
    return None if node is None else node.centroid[2]


def _pair_gap(g: SceneGraph, a_id: int, b_id: int) -> float | None:
    a, b = g.get_node(a_id), g.get_node(b_id)
    if a is None or b is None:
        return None
    return _footprint_gap(a, b)


def infer_and_verify(g: SceneGraph, cfg: RelationConfig | None = None) -> list[SpatialRelation]:
    """Inference followed by the verification pass (a no-op by construction,
    kept as the single ingestion entry point)."""
    cleaned, _ = verify(infer_relations(g, cfg), g, cfg)
    return cleaned


def is_allocentric(predicate: str) -> bool:
    normalized = predicate.strip().lower().replace(" ", "_")
    if normalized in ("front", "in_front_of"):
        normalized = "in_front"
    return normalized in ALLOCENTRIC_PREDICATES
