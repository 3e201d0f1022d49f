"""Canonical-frame caches for expensive geometric structures.

Every searcher rebuilds the arena in its own frame, so naively each one
would recompute visibility regions, visibility graphs and patrol plans on
coordinates nobody else shares.  All those structures are similarity
covariant, so they are computed once on the canonical presentation of the
polygon (the minimal boundary encoding) and transformed into each
instance's coordinates on demand.  Cache keys are canonical fingerprints,
which agree across searchers and across simulation runs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from polymeet.augmentation import (
    AugmentedPolygon,
    BranchPartition,
    StageSchedule,
    augment_general,
    build_branch_partition,
)
from polymeet.geometry import (
    Point,
    PolygonWithHoles,
    RegionPiece,
    Similarity,
    VisibilityGraph,
    VisibilityRegion,
    transform_polygon,
    visibility_graph,
    visibility_region,
)
from polymeet.symmetry import (
    PivotChoice,
    SymmetryProfile,
    select_pivot_general,
    select_pivot_vertex_improved,
    symmetricity,
)

_CANON: dict = {}


def _canonical_entry(P: PolygonWithHoles):
    prof = symmetricity(P)
    entry = _CANON.get(prof.fingerprint)
    if entry is None:
        Pc = transform_polygon(P, prof.canonical_frame)
        entry = {"polygon": Pc, "regions": {}, "plans": {}}
        _CANON[prof.fingerprint] = entry
    return prof, entry


def region(P: PolygonWithHoles, p: Point) -> VisibilityRegion:
    """Visibility region of p in P, served through the canonical cache."""
    inst = P._cache.setdefault("inst_regions", {})
    if p in inst:
        return inst[p]
    prof, entry = _canonical_entry(P)
    fwd = prof.canonical_frame
    pc = fwd.apply(p)
    regions = entry["regions"]
    rc = regions.get(pc)
    if rc is None:
        rc = visibility_region(entry["polygon"], pc)
        regions[pc] = rc
    inv = fwd.inverse()
    flip = fwd.det_sign() < 0
    pieces = []
    for piece in rc.pieces:
        a, b = inv.apply(piece.a), inv.apply(piece.b)
        pieces.append(RegionPiece(a, b, piece.a_full_vertex, piece.b_full_vertex, piece.edge))
    out = VisibilityRegion(p, tuple(pieces))
    inst[p] = out
    return out


def vis_graph(P: PolygonWithHoles) -> VisibilityGraph:
    if "visgraph" in P._cache:
        return P._cache["visgraph"]
    prof, entry = _canonical_entry(P)
    gc = entry.get("visgraph")
    if gc is None:
        gc = visibility_graph(entry["polygon"])
        entry["visgraph"] = gc
    fwd = prof.canonical_frame
    pts = P.vertices()
    canon_index = {q: i for i, q in enumerate(gc.points)}
    mapping = [canon_index[fwd.apply(p)] for p in pts]
    back = {ci: i for i, ci in enumerate(mapping)}
    adj = {i: {back[cj] for cj in gc.adj[mapping[i]]} for i in range(len(pts))}
    fully = {(back[a], back[b]) for a, b in gc.fully}
    g = VisibilityGraph(pts, {p: i for i, p in enumerate(pts)}, adj, fully)
    P._cache["visgraph"] = g
    return g


class Alg1Plan:
    """Pivot, cuts and both tours of the general algorithm for one seed."""

    def __init__(self, pivot: PivotChoice, tours: dict[str, tuple[Point, ...]]):
        self.pivot = pivot
        self.tours = tours


def alg1_plan(P: PolygonWithHoles, seed: int) -> Alg1Plan:
    plans = P._cache.setdefault("alg1_plans", {})
    if seed in plans:
        return plans[seed]
    prof = symmetricity(P)
    pivot = select_pivot_general(P, prof, seed)
    aug = augment_general(P, pivot, prof)
    plan = Alg1Plan(pivot, {"CW": aug.tour("CW"), "CCW": aug.tour("CCW")})
    plans[seed] = plan
    return plan


class Alg2Plan:
    def __init__(
        self,
        rotational: bool,
        pivot: Point,
        class_points: tuple[Point, ...],
        partition: Optional[BranchPartition],
        schedule: Optional[StageSchedule],
        alg1: Optional[Alg1Plan],
    ):
        self.rotational = rotational
        self.pivot = pivot
        self.class_points = class_points
        self.partition = partition
        self.schedule = schedule
        self.alg1 = alg1

    def j_tour(self, j: int, direction: str) -> tuple[Point, ...]:
        return self.partition.j_tour(j, direction, self.pivot)


def alg2_plan(P: PolygonWithHoles, seed: int) -> Alg2Plan:
    plans = P._cache.setdefault("alg2_plans", {})
    if seed in plans:
        return plans[seed]
    prof = symmetricity(P)
    if prof.sigma > 1:
        ids, pts = select_pivot_vertex_improved(P, prof)
        partition = build_branch_partition(P, prof, ids)
        pivot = pts[seed % len(pts)]
        plan = Alg2Plan(True, pivot, tuple(pts), partition, partition.schedule(), None)
    else:
        a1 = alg1_plan(P, seed)
        plan = Alg2Plan(False, a1.pivot.location, a1.pivot.class_points, None, None, a1)
    plans[seed] = plan
    return plan
