"""Cuts, tours, branch partitions, j-tours and the stage schedule."""

from fractions import Fraction as F

import pytest

from polymeet import fixtures as fx
from polymeet.augmentation import (
    AugmentedPolygon,
    ConstructionError,
    StageSchedule,
    _seg_key,
    augment_general,
    boundary_tour,
    build_branch_partition,
    classify_segment_vs_edge,
    stage_schedule,
)
from polymeet.geometry import (
    Point,
    Similarity,
    on_segment,
    point_in_closed_ring,
    transform_polygon,
    visible,
)
from polymeet.symmetry import select_pivot_general, symmetricity


def _aug(P, seed=0):
    prof = symmetricity(P)
    pv = select_pivot_general(P, prof, seed)
    return augment_general(P, pv, prof)


# --- general augmentation ---------------------------------------------------


def test_no_holes_no_cuts():
    for P in (fx.scalene_polygon(), fx.l_polygon(), fx.four_branch_polygon()):
        assert _aug(P).cuts == ()


def test_star_one_cut_euler():
    for sigma in (2, 4):
        P = fx.star_polygon(sigma)
        aug = _aug(P)
        # one hole merged needs exactly one cut (axial chain)
        assert len(aug.cuts) == 1
        for a, b in aug.cuts:
            assert aug.pivot.location not in (a, b)


def test_fig3_axial_cut_set_symmetric():
    P = fx.fig3_polygon()
    prof = symmetricity(P)
    pv = select_pivot_general(P, prof, 0)
    aug = augment_general(P, pv, prof)
    # reflecting the cut set across the axis is an identity on the set
    refl = next(g for g in prof.group if g.is_reflection)
    keys = {_seg_key(a, b) for a, b in aug.cuts}
    mirrored = {
        _seg_key(refl.transform.apply(a), refl.transform.apply(b)) for a, b in aug.cuts
    }
    assert keys == mirrored
    # 3 holes need 3 merges minimum; mirror pair adds its twin
    assert len(aug.cuts) >= 3
    # tour traverses each cut twice and each edge once (checked internally);
    # here: total length = boundary points + 2 * cuts segments
    tour = aug.tour("CCW")
    assert tour[0] == pv.location


def test_tour_mirror_property():
    for name in ("star4", "fig3", "annulus"):
        P = fx.by_name(name).build()
        aug = _aug(P)
        ccw = aug.tour("CCW")
        cw = aug.tour("CW")
        assert cw[0] == ccw[0]
        assert list(cw[1:]) == list(reversed(ccw[1:]))


def test_same_pivot_same_tour_discordant_same_set():
    # two searchers with the same pivot produce identical tours even when
    # one of them mirrors the polygon first (discordant handedness)
    P = fx.fig3_polygon()
    prof = symmetricity(P)
    pv = select_pivot_general(P, prof, 0)
    aug1 = augment_general(P, pv, prof)
    T = Similarity.mapping_segment(
        Point(F(0), F(0)), Point(F(1), F(0)), Point(F(0), F(0)), Point(F(1), F(0)), flip=True
    )
    P2 = transform_polygon(P, T)
    prof2 = symmetricity(P2)
    pv2 = select_pivot_general(P2, prof2, 0)
    aug2 = augment_general(P2, pv2, prof2)
    # map tours back into the original frame
    back = T.inverse()
    tours1 = {aug1.tour("CW"), aug1.tour("CCW")}
    tours2 = {
        tuple(back.apply(p) for p in aug2.tour("CW")),
        tuple(back.apply(p) for p in aug2.tour("CCW")),
    }
    assert pv2.location == T.apply(pv.location) or back.apply(pv2.location) in {
        p for p in pv.class_points
    }
    if back.apply(pv2.location) == pv.location:
        assert tours1 == tours2


def test_cuts_are_valid_interior_segments():
    for name in ("star3", "star5", "fig3", "hidden_hole"):
        P = fx.by_name(name).build()
        aug = _aug(P)
        assert len(aug.cuts) >= len(P.holes)
        for a, b in aug.cuts:
            assert visible(P, a, b)
        # pairwise non-crossing
        cuts = list(aug.cuts)
        for i in range(len(cuts)):
            for j in range(i + 1, len(cuts)):
                ev = classify_segment_vs_edge(*cuts[i], *cuts[j])
                assert ev is None or ev.kind == "touch"


# --- branch partition ---------------------------------------------------------


def test_fig5_partition_counts():
    part = build_branch_partition(fx.fig5_polygon())
    assert part.branch_count == 4
    assert part.sub_branch_count == 8
    assert part.m == 8


def test_regular_hexagon_degenerate():
    part = build_branch_partition(fx.regular_polygon(6))
    assert part.branch_count == 0
    assert part.m == 0
    assert part.t == 0
    tour = part.j_tour(0, "CCW", part.pivot_class[0])
    assert len(tour) == 6


def test_four_branch_partition_and_adjacency():
    part = build_branch_partition(fx.four_branch_polygon())
    assert part.branch_count == 4
    assert part.sub_branch_count == 4
    # Lemma-2 shape: every triangle at depth d+1 shares a full side with the
    # boundary of P_d (its parent diagonal)
    by_side: dict[int, list] = {}
    for p in part.pieces:
        for sid in p.side_ids:
            by_side.setdefault(sid, []).append(p)
    for p in part.pieces:
        if p.depth == 1:
            assert any(part.side_kind[s] == "mouth" for s in p.side_ids)
        else:
            parents = [
                q
                for sid in p.side_ids
                if part.side_kind[sid] == "diag"
                for q in by_side[sid]
                if q is not p and q.depth == p.depth - 1
            ]
            assert parents, f"no parent for triangle at depth {p.depth}"


def test_twin_subbranches_mirrored():
    P = fx.fig5_polygon()
    prof = symmetricity(P)
    part = build_branch_partition(P)
    refls = [g for g in prof.group if g.is_reflection]
    # sub-branches come in consecutive twin pairs (left, mirrored)
    for sb in range(0, part.sub_branch_count, 2):
        left = [p for p in part.pieces if p.sub_branch == sb]
        right = [p for p in part.pieces if p.sub_branch == sb + 1]
        assert len(left) == len(right)
        lset = {frozenset((q.x, q.y) for q in p.points) for p in left}
        matched = False
        for g in refls:
            rset = {
                frozenset(((m := g.transform.apply(q)).x, m.y) for q in p.points)
                for p in right
            }
            if rset == lset:
                matched = True
                break
        assert matched


def test_depth_multiset_mirrored():
    part = build_branch_partition(fx.fig5_polygon())
    for sb in range(0, part.sub_branch_count, 2):
        dl = sorted(p.depth for p in part.pieces if p.sub_branch == sb)
        dr = sorted(p.depth for p in part.pieces if p.sub_branch == sb + 1)
        assert dl == dr


def test_j_tour_nesting_and_extremes():
    P = fx.fig5_polygon()
    part = build_branch_partition(P)
    pivot = part.pivot_class[0]
    tour0 = part.j_tour(0, "CCW", pivot)
    assert set(tour0) == set(part.q_ring)
    # nesting: vertices of the j-tour lie inside the closure of P_{j+1}
    for j in range(part.m):
        tj = part.j_tour(j, "CCW", pivot)
        region = [p for p in part.pieces if p.depth <= j + 1]
        for pt in set(tj):
            ok = point_in_closed_ring(pt, list(part.q_ring)) or any(
                point_in_closed_ring(pt, list(p.points)) for p in region
            )
            assert ok
    # m-tour equals the boundary tour of the branch-augmented polygon
    from polymeet.symmetry import PivotChoice

    pv = PivotChoice(kind="vertex", location=pivot, class_points=tuple(part.pivot_class))
    aug = AugmentedPolygon(P, part.cuts, pv)
    bt = aug.tour("CCW")
    mt = part.j_tour(part.m, "CCW", pivot)
    assert set(mt) == set(bt)
    assert len(mt) == len(bt)
    assert mt == bt


def test_j_tour_directions_mirror():
    part = build_branch_partition(fx.four_branch_polygon())
    pivot = part.pivot_class[1]
    for j in (0, 2, part.m):
        ccw = part.j_tour(j, "CCW", pivot)
        cw = part.j_tour(j, "CW", pivot)
        assert cw[0] == ccw[0] == pivot
        assert list(cw[1:]) == list(reversed(ccw[1:]))


def test_radial_cuts_noncrossing():
    part = build_branch_partition(fx.fig5_polygon())
    cuts = list(part.cuts)
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            ev = classify_segment_vs_edge(*cuts[i], *cuts[j])
            assert ev is None or ev.kind == "touch"


# --- stage schedule --------------------------------------------------------------


def test_schedule_arithmetic_m2_t3():
    sch = StageSchedule(2, 3)
    assert sch.length == 22
    entries = sch.entries()
    assert entries[0] == ("CW", 0)
    assert entries[1] == ("CW", 1)
    assert all(e == ("CCW", 2) for e in entries[2:21])
    assert entries[21] == ("CCW", 1)
    # stage 21: j = min(2, 22-21) = 1
    assert sch.entry(21) == ("CCW", 1)


def test_schedule_m0():
    sch = StageSchedule(0, 3)
    assert sch.length == 18
    assert all(e == ("CCW", 0) for e in sch.entries())
    assert all(sch.is_perimeter(s) for s in range(18))


def test_schedule_fig5_counts():
    part = build_branch_partition(fx.fig5_polygon())
    sch = stage_schedule(part)
    assert sch.length == 2 * part.m + 2 * part.t**2
    assert sch.nominal_perimeter_count == 2 * part.t**2
    perims = [s for s in range(sch.length) if sch.is_perimeter(s)]
    # the stage arithmetic yields one extra m-tour beyond the nominal count
    assert len(perims) == 2 * part.t**2 + 1
