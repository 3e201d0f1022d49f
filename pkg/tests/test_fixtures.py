"""Fixture generators: validity, declared symmetry, and the geometric
properties the theorems lean on."""

from fractions import Fraction as F

import pytest

from polymeet import fixtures as fx
from polymeet.geometry import Point, centroid_in_hole, pmul, visible
from polymeet.scalars import CyclotomicField
from polymeet.symmetry import symmetricity


@pytest.mark.parametrize("spec", fx.GALLERY, ids=lambda s: s.name)
def test_gallery_validates_and_matches_declared_symmetry(spec):
    P = spec.build()
    P._validate()
    prof = symmetricity(P)
    assert prof.sigma == spec.sigma
    assert len(prof.axes) == spec.axes
    assert len(P.holes) == spec.holes
    _, ih = centroid_in_hole(P)
    assert ih == spec.centroid_in_hole


def _rotation(sigma):
    if sigma in (2, 4):
        def rot(p):
            for _ in range(4 // sigma * 1 if sigma == 4 else 2):
                p = Point(-p.y, p.x)
            return p
        return rot
    field = CyclotomicField(4 * sigma)
    c = field.cos2pi(1, sigma)
    s = field.sin2pi(1, sigma)
    return lambda p: Point(c * p.x - s * p.y, s * p.x + c * p.y)


@pytest.mark.parametrize("sigma", [2, 3, 4, 5])
def test_star_blocking_property_sampled(sigma):
    """No two points whose angular distance about the center is a multiple
    of 2*pi/sigma see each other; checked on a spread of sampled pairs."""
    P = fx.star_polygon(sigma)
    rot = _rotation(sigma)
    base = []
    for scale in (F(1), F(7, 8), F(3, 4), F(9, 10), F(4, 5), F(13, 16),
                  F(11, 12), F(19, 20), F(5, 6), F(31, 32), F(27, 28), F(15, 16)):
        for raw in (
            Point(F(8), F(0)), Point(F(6), F(0)), Point(F(7), F(1, 5)),
            Point(F(7), F(-1, 5)), Point(F(9), F(1, 9)), Point(F(11, 2), F(1, 8)),
        ):
            base.append(pmul(raw, scale))
    # rotate samples into every arm as well
    samples = []
    for p in base:
        q = p
        for _ in range(sigma):
            samples.append(q)
            q = rot(q)
    checked = 0
    for p in samples:
        if checked >= 120:
            break
        if not P.contains(p):
            continue
        q = rot(p)
        for _ in range(sigma - 1):
            assert P.contains(q)
            assert not visible(P, p, q), (p, q)
            checked += 1
            q = rot(q)
    assert checked >= 100


def test_star_sigma_exact():
    for sigma in (2, 3, 4, 5):
        assert symmetricity(fx.star_polygon(sigma)).sigma == sigma


def test_hidden_hole_true_sigma_one_fake_two():
    real = fx.hidden_hole_polygon()
    fake = fx.hidden_hole_polygon(include_center=False)
    assert symmetricity(real).sigma == 1
    assert symmetricity(fake).sigma == 2


def test_hidden_hole_boundary_views_two_fold():
    """The externally visible geometry is invariant under the half turn:
    views from boundary-adjacent points match the symmetric fake polygon."""
    from polymeet.searcher import expected_snapshot_pieces
    from polymeet.simulator import inward_point

    real = fx.hidden_hole_polygon()
    fake = fx.hidden_hole_polygon(include_center=False)
    for k in range(len(real.outer)):
        p = inward_point(real, k)
        assert expected_snapshot_pieces(real, p) == expected_snapshot_pieces(fake, p)


def test_four_branch_deep_blindness():
    P = fx.four_branch_polygon()
    deep = [Point(F(8), F(39, 4)), Point(F(7), F(8)), Point(F(10) - F(1, 8), F(9))]
    central = [
        Point(F(0), F(0)), Point(F(2), F(2)), Point(F(-2), F(2)),
        Point(F(2), F(-2)), Point(F(-2), F(-2)), Point(F(1), F(0)),
    ]
    for d in deep:
        assert P.strictly_inside(d) or P.contains(d)
        for c in central:
            assert not visible(P, d, c), (d, c)


def test_fixture_cli_kinds():
    assert fx.build("star", sigma=3).holes
    assert fx.build("regular", n=5)
    assert fx.build("four_branch")
    with pytest.raises(KeyError):
        fx.build("nope")
