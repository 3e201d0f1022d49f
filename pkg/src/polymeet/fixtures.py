"""Parametric generators for the test arenas and a regression gallery.

Exact rotational symmetry of order other than 1, 2, 4 is impossible with
rational coordinates, so those fixtures emit coordinates in a real
cyclotomic field; rotation by the symmetry angle then maps vertex sets
onto themselves exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from polymeet.geometry import Point, PolygonWithHoles
from polymeet.scalars import CyclotomicField, Scalar

F = Fraction


def _polar(field: CyclotomicField, r: Scalar, k: int, slices: int) -> Point:
    """Point at radius r, angle 2*pi*k/slices, exact."""
    c = field.cos2pi(k % slices, slices)
    s = field.sin2pi(k % slices, slices)
    return Point(r * c, r * s)


def star_polygon(sigma: int) -> PolygonWithHoles:
    """Pointed star with one large central hole almost touching the notches.

    Symmetricity is exactly sigma, and no two points whose angular distance
    about the center is a multiple of 2*pi/sigma can see each other: chords
    between such points either pass below the notch radius (blocked by the
    hole, whose spikes reach into the arms) or above it (blocked by the
    notch wedge).
    """
    if sigma < 2:
        raise ValueError("star requires sigma >= 2")
    n = 2 * sigma
    if sigma == 2:
        outer = [Point(F(10), F(0)), Point(F(0), F(2)), Point(F(-10), F(0)), Point(F(0), F(-2))]
        hole = [Point(F(5), F(0)), Point(F(0), F(1)), Point(F(-5), F(0)), Point(F(0), F(-1))]
        return PolygonWithHoles(outer, [list(reversed(hole))])
    if sigma == 4:
        # rational pinch points on the diagonals
        outer = []
        hole = []
        tips = [(10, 0), (0, 10), (-10, 0), (0, -10)]
        notches = [(2, 2), (-2, 2), (-2, -2), (2, -2)]
        spikes = [(5, 0), (0, 5), (-5, 0), (0, -5)]
        dips = [(1, 1), (-1, 1), (-1, -1), (1, -1)]
        for k in range(4):
            outer.append(Point(F(tips[k][0]), F(tips[k][1])))
            outer.append(Point(F(notches[k][0]), F(notches[k][1])))
            hole.append(Point(F(spikes[k][0]), F(spikes[k][1])))
            hole.append(Point(F(dips[k][0]), F(dips[k][1])))
        return PolygonWithHoles(outer, [list(reversed(hole))])
    field = CyclotomicField(4 * sigma)
    r_tip = F(10)
    r_notch = F(3)
    # hole spikes must satisfy rho_v * cos(pi/sigma) >= r_notch
    rho_v = {3: F(7), 5: F(9, 2)}.get(sigma)
    if rho_v is None:
        cos_approx = float(field.cos2pi(1, 2 * sigma))
        rho_v = F(int(float(r_notch) / cos_approx * 4) + 2, 4)
    rho_d = F(5, 2)
    outer = []
    hole = []
    for k in range(sigma):
        outer.append(_polar(field, r_tip, 2 * k, n))
        outer.append(_polar(field, r_notch, 2 * k + 1, n))
        hole.append(_polar(field, rho_v, 2 * k, n))
        hole.append(_polar(field, rho_d, 2 * k + 1, n))
    return PolygonWithHoles(outer, [list(reversed(hole))])


def regular_polygon(n: int, radius: Scalar = F(5)) -> PolygonWithHoles:
    if n == 4:
        r = F(radius)
        return PolygonWithHoles(
            [Point(r, r), Point(-r, r), Point(-r, -r), Point(r, -r)]
        )
    field = CyclotomicField(n if n % 4 == 0 else 4 * n)
    return PolygonWithHoles([_polar(field, F(radius), k, n) for k in range(n)])


def four_branch_polygon() -> PolygonWithHoles:
    """Pinwheel with four L-shaped corridors on a central square (sigma=4,
    no holes, no axial symmetry).  Points deep inside a corridor cannot see
    any of the central square."""
    base = [(2, -2), (10, -2), (10, 10), (6, 10), (6, 2)]
    outer: list[Point] = []
    for k in range(4):
        for x, y in base:
            for _ in range(k):
                x, y = -y, x
            outer.append(Point(F(x), F(y)))
    return PolygonWithHoles(outer)


def fig5_polygon() -> PolygonWithHoles:
    """Axially and rotationally symmetric (sigma=4) polygon with one
    axis-crossing hole per arm; the improved-algorithm preprocessing yields
    4 branches, 8 sub-branches and a dual tree of height 8.

    Each arm is a corridor [3,13]x[-3,3] with an exterior notch
    [11,13]x[-1,1] bitten out of its end wall and a toothed hole centered
    on the arm axis; the teeth force the sub-branch triangulations into
    depth-8 chains."""
    arm = [(3, -3), (13, -3), (13, -1), (11, -1), (11, 1), (13, 1), (13, 3)]
    outer: list[Point] = []
    for k in range(4):
        outer.extend(Point(F(x), F(y)) for x, y in (_apply_rot(p, k) for p in arm))
    holes = []
    hole = [(5, -2), (7, -2), (8, -1), (9, -2), (10, -2),
            (10, 2), (9, 2), (8, 1), (7, 2), (5, 2)]  # CCW; store CW
    for k in range(4):
        hk = [_apply_rot(p, k) for p in hole]
        holes.append([Point(F(x), F(y)) for x, y in reversed(hk)])
    return PolygonWithHoles(outer, holes)


def _apply_rot(p: tuple, k: int) -> tuple:
    x, y = p
    for _ in range(k % 4):
        x, y = -y, x
    return (x, y)


def fig3_polygon() -> PolygonWithHoles:
    """Axially symmetric (one axis, sigma=1) polygon with an axis-crossing
    hole and one mirror pair of off-axis holes."""
    outer = [
        Point(F(-6), F(0)), Point(F(6), F(0)), Point(F(6), F(8)),
        Point(F(0), F(12)), Point(F(-6), F(8)),
    ]
    axis_hole = [Point(F(-1), F(1)), Point(F(1), F(1)), Point(F(1), F(3)), Point(F(-1), F(3))]
    right = [Point(F(3), F(2)), Point(F(5), F(2)), Point(F(4), F(4))]
    left = [Point(-p.x, p.y) for p in right]
    return PolygonWithHoles(
        outer,
        [list(reversed(axis_hole)), list(reversed(right)), [Point(p.x, p.y) for p in left]],
    )


def hidden_hole_polygon(include_center: bool = True) -> PolygonWithHoles:
    """Looks 2-fold symmetric from the external boundary; a small scalene
    hole near the center (hidden behind four baffle slabs) makes the true
    symmetricity 1.  With include_center=False this returns the symmetric
    polygon that external observation suggests."""
    outer = [Point(F(-10), F(-6)), Point(F(10), F(-6)), Point(F(10), F(6)), Point(F(-10), F(6))]

    def rect(x0, y0, x1, y1):
        # CCW ring; stored reversed as a hole
        return [Point(F(x0), F(y0)), Point(F(x1), F(y0)), Point(F(x1), F(y1)), Point(F(x0), F(y1))]

    top = rect(F(-9, 2), 2, F(9, 2), 3)
    bottom = rect(F(-9, 2), -3, F(9, 2), -2)
    left = rect(-6, -4, -5, 4)
    right = rect(5, -4, 6, 4)
    holes = [list(reversed(r)) for r in (top, bottom, left, right)]
    if include_center:
        tri = [Point(F(3, 2), F(-1, 4)), Point(F(3), F(0)), Point(F(2), F(3, 4))]
        holes.append(list(reversed(tri)))
    return PolygonWithHoles(outer, holes)


def l_polygon() -> PolygonWithHoles:
    return PolygonWithHoles(
        [Point(F(0), F(0)), Point(F(4), F(0)), Point(F(4), F(2)),
         Point(F(2), F(2)), Point(F(2), F(4)), Point(F(0), F(4))]
    )


def comb_polygon() -> PolygonWithHoles:
    pts = [(0, 0), (9, 0), (9, 4), (8, 4), (8, 1), (5, 1), (5, 4), (4, 4), (4, 1), (0, 1)]
    return PolygonWithHoles([Point(F(x), F(y)) for x, y in pts])


def scalene_polygon() -> PolygonWithHoles:
    return PolygonWithHoles([Point(F(0), F(0)), Point(F(7), F(1)), Point(F(2), F(5))])


def rectangle_polygon() -> PolygonWithHoles:
    return PolygonWithHoles([Point(F(0), F(0)), Point(F(6), F(0)), Point(F(6), F(4)), Point(F(0), F(4))])


def square_polygon() -> PolygonWithHoles:
    return regular_polygon(4, F(2))


def annulus_polygon() -> PolygonWithHoles:
    outer = [Point(F(-6), F(-4)), Point(F(6), F(-4)), Point(F(6), F(4)), Point(F(-6), F(4))]
    hole = [Point(F(-2), F(-1)), Point(F(2), F(-1)), Point(F(2), F(1)), Point(F(-2), F(1))]
    return PolygonWithHoles(outer, [list(reversed(hole))])


def irregular12_polygon() -> PolygonWithHoles:
    """Deterministic asymmetric 12-gon with a triangular hole (oracle target)."""
    pts = [
        (0, 0), (5, -1), (9, 1), (11, 4), (9, 6), (10, 9),
        (6, 8), (3, 10), (1, 7), (-2, 8), (-1, 4), (-2, 1),
    ]
    hole = [(4, 3), (6, 4), (5, 6)]
    return PolygonWithHoles(
        [Point(F(x), F(y)) for x, y in pts],
        [[Point(F(x), F(y)) for x, y in reversed(hole)]],
    )


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    build: Callable[[], PolygonWithHoles]
    sigma: int
    axes: int
    holes: int
    centroid_in_hole: bool


GALLERY: list[FixtureSpec] = [
    FixtureSpec("scalene", scalene_polygon, 1, 0, 0, False),
    FixtureSpec("l_shape", l_polygon, 1, 1, 0, False),
    FixtureSpec("comb", comb_polygon, 1, 0, 0, False),
    FixtureSpec("rectangle", rectangle_polygon, 2, 2, 0, False),
    FixtureSpec("square", square_polygon, 4, 4, 0, False),
    FixtureSpec("triangle3", lambda: regular_polygon(3), 3, 3, 0, False),
    FixtureSpec("star2", lambda: star_polygon(2), 2, 2, 1, True),
    FixtureSpec("star3", lambda: star_polygon(3), 3, 3, 1, True),
    FixtureSpec("star4", lambda: star_polygon(4), 4, 4, 1, True),
    FixtureSpec("star5", lambda: star_polygon(5), 5, 5, 1, True),
    FixtureSpec("four_branch", four_branch_polygon, 4, 0, 0, False),
    FixtureSpec("fig5", fig5_polygon, 4, 4, 4, False),
    FixtureSpec("fig3", fig3_polygon, 1, 1, 3, False),
    FixtureSpec("hidden_hole", hidden_hole_polygon, 1, 0, 5, False),
    FixtureSpec("annulus", annulus_polygon, 2, 2, 1, True),
]


def by_name(name: str) -> FixtureSpec:
    for spec in GALLERY:
        if spec.name == name:
            return spec
    raise KeyError(f"unknown fixture {name!r}")


def build(name: str, **params) -> PolygonWithHoles:
    if name == "star":
        return star_polygon(int(params.get("sigma", 5)))
    if name == "regular":
        return regular_polygon(int(params.get("n", 5)))
    return by_name(name).build()
