"""Symmetry detection and pivot-selection tests.

The brute-force oracle tests rotations directly: a rotation self-map must
send outer vertex 0 to an outer vertex at equal center distance, and the
induced exact linear map must permute the full vertex set.
"""

from fractions import Fraction as F

import pytest

from polymeet import fixtures as fx
from polymeet.geometry import (
    Point,
    PolygonWithHoles,
    Similarity,
    centroid,
    cross,
    dist_sq,
    dot,
    psub,
    transform_polygon,
)
from polymeet.scalars import sgn
from polymeet.symmetry import (
    select_pivot_general,
    select_pivot_vertex_improved,
    symmetricity,
)


def oracle_sigma(P: PolygonWithHoles) -> int:
    """Count exact rotational self-maps via candidate vertex images."""
    c = centroid(P)
    pts = P.vertices()
    vset = set(pts)
    v0 = P.outer[0]
    u = psub(v0, c)
    uu = dot(u, u)
    count = 0
    for w0 in P.outer:
        w = psub(w0, c)
        if sgn(dot(w, w) - uu) != 0:
            continue
        cos = dot(u, w) / uu
        sin = cross(u, w) / uu
        ok = True
        for p in pts:
            d = psub(p, c)
            img = Point(c.x + cos * d.x - sin * d.y, c.y + sin * d.x + cos * d.y)
            if img not in vset:
                ok = False
                break
        if ok:
            count += 1
    return count


@pytest.mark.parametrize("spec", fx.GALLERY, ids=lambda s: s.name)
def test_sigma_matches_oracle_and_expectation(spec):
    P = spec.build()
    prof = symmetricity(P)
    assert prof.sigma == spec.sigma
    assert prof.sigma == oracle_sigma(P)
    assert len(prof.axes) in (0, prof.sigma)
    assert len(prof.axes) == spec.axes


def test_square_axes_two_classes():
    prof = symmetricity(fx.square_polygon())
    assert prof.sigma == 4
    assert len(prof.axes) == 4
    assert sorted(len(c) for c in prof.axis_classes) == [2, 2]


def test_hexagon_single_class():
    P = fx.regular_polygon(6)
    prof = symmetricity(P)
    assert prof.sigma == 6
    assert len(prof.similarity_classes) == 1
    assert len(prof.similarity_classes[0]) == 6


def test_rectangle_single_corner_class():
    prof = symmetricity(fx.rectangle_polygon())
    assert len(prof.similarity_classes) == 1
    assert len(prof.similarity_classes[0]) == 4


def test_class_sizes_sigma_or_twice():
    for spec in fx.GALLERY:
        P = spec.build()
        prof = symmetricity(P)
        for cls in prof.similarity_classes:
            assert len(cls) in (prof.sigma, 2 * prof.sigma)


def random_similarity(k: int) -> Similarity:
    # deterministic pseudo-random rational similarity, optionally reflecting
    a = Point(F(k % 5 + 1, 3), F(k % 7 - 3, 2))
    b = Point(a.x + F(2 * (k % 3) + 1, 4), a.y + F(k % 4 - 2, 5) + F(1, 9))
    return Similarity.mapping_segment(
        Point(F(0), F(0)), Point(F(1), F(0)), a, b, flip=(k % 2 == 1)
    )


@pytest.mark.parametrize("name", ["l_shape", "rectangle", "square", "fig3", "four_branch", "fig5"])
def test_similarity_invariance(name):
    P = fx.by_name(name).build()
    prof = symmetricity(P)
    for k in (1, 2, 5):
        T = random_similarity(k)
        P2 = transform_polygon(P, T)
        prof2 = symmetricity(P2)
        assert prof2.sigma == prof.sigma
        assert len(prof2.axes) == len(prof.axes)
        assert prof2.fingerprint == prof.fingerprint
        # classes map as partitions of transformed points
        pts = P.vertices()
        pts2 = P2.vertices()
        part1 = {frozenset((T.apply(pts[v]).x, T.apply(pts[v]).y) for v in cls)
                 for cls in prof.similarity_classes}
        part2 = {frozenset((pts2[v].x, pts2[v].y) for v in cls)
                 for cls in prof2.similarity_classes}
        assert part1 == part2
        # canonical class ORDER is preserved
        for c1, c2 in zip(prof.similarity_classes, prof2.similarity_classes):
            s1 = frozenset((T.apply(pts[v]).x, T.apply(pts[v]).y) for v in c1)
            s2 = frozenset((pts2[v].x, pts2[v].y) for v in c2)
            assert s1 == s2


def test_pivot_general_sigma1_unique():
    P = fx.scalene_polygon()
    prof = symmetricity(P)
    p0 = select_pivot_general(P, prof, 0)
    for seed in range(1, 5):
        assert select_pivot_general(P, prof, seed).location == p0.location
    assert p0.kind == "vertex"


def test_pivot_square_class_closure():
    P = fx.square_polygon()
    prof = symmetricity(P)
    locs = {select_pivot_general(P, prof, s).location for s in range(8)}
    # all chosen pivots lie in one orbit under the full symmetry group
    imgs = set()
    for g in prof.group:
        for p in locs:
            imgs.add(g.transform.apply(p))
    assert locs <= imgs
    # and every pivot is on the boundary
    for p in locs:
        assert P.on_boundary(p)


def test_pivot_star5_axial_unique_per_axis():
    P = fx.star_polygon(5)
    prof = symmetricity(P)
    assert len(prof.axis_classes) == 1 and len(prof.axis_classes[0]) == 5
    seen = set()
    for seed in range(5):
        pc = select_pivot_general(P, prof, seed)
        assert len(pc.class_points) == 1  # odd sigma: point fully determined by axis
        seen.add(pc.location)
    assert len(seen) == 5


def test_pivot_choice_on_boundary_everywhere():
    for spec in fx.GALLERY:
        P = spec.build()
        prof = symmetricity(P)
        pc = select_pivot_general(P, prof, 3)
        assert P.on_boundary(pc.location)


def test_improved_pivot_fig5_inner_square():
    P = fx.fig5_polygon()
    prof = symmetricity(P)
    ids, pts = select_pivot_vertex_improved(P, prof)
    assert len(ids) == 4
    assert set(pts) == {Point(F(3), F(3)), Point(F(-3), F(3)), Point(F(-3), F(-3)), Point(F(3), F(-3))}


def test_improved_pivot_regular_polygon_all_vertices():
    P = fx.regular_polygon(6)
    prof = symmetricity(P)
    ids, pts = select_pivot_vertex_improved(P, prof)
    assert len(ids) == 6


def test_improved_pivot_asymmetric_singleton():
    P = fx.scalene_polygon()
    prof = symmetricity(P)
    ids, pts = select_pivot_vertex_improved(P, prof)
    assert len(ids) == 1
