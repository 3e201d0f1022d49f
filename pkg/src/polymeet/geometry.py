"""Exact computational-geometry substrate.

Everything here is decided with exact arithmetic over ``Fraction`` or
``RealCyclotomic`` scalars: visibility of points and vertex pairs,
visibility regions of the boundary, visibility graphs, geodesic vertex
paths, centroids.  Boundary membership counts as inside: searchers travel
along edges and diagonals, and a sight segment may graze the boundary
without crossing into the exterior.

Orientation of stored rings: outer counterclockwise, holes clockwise
(interior always on the left of a directed boundary edge).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, NamedTuple, Optional, Sequence

from polymeet import kernels
from polymeet.scalars import (
    PathLength,
    Scalar,
    scalar_float,
    scalar_from_json,
    scalar_key,
    scalar_to_json,
    sgn,
)


class GeometryError(ValueError):
    pass


class PointOutsideError(GeometryError):
    pass


class PolygonValidationError(GeometryError):
    def __init__(self, message: str, ring: int | None = None, vertex: int | None = None):
        loc = ""
        if ring is not None:
            loc = f" (ring {ring}" + (f", vertex {vertex}" if vertex is not None else "") + ")"
        super().__init__(message + loc)
        self.ring = ring
        self.vertex = vertex


class Point(NamedTuple):
    x: Scalar
    y: Scalar


ZERO = Point(Fraction(0), Fraction(0))


def padd(a: Point, b: Point) -> Point:
    return Point(a.x + b.x, a.y + b.y)


def psub(a: Point, b: Point) -> Point:
    return Point(a.x - b.x, a.y - b.y)


def pmul(a: Point, k: Scalar) -> Point:
    return Point(a.x * k, a.y * k)


def cross(a: Point, b: Point) -> Scalar:
    return a.x * b.y - a.y * b.x


def dot(a: Point, b: Point) -> Scalar:
    return a.x * b.x + a.y * b.y


def dist_sq(a: Point, b: Point) -> Scalar:
    dx = a.x - b.x
    dy = a.y - b.y
    return dx * dx + dy * dy


def orient(a: Point, b: Point, c: Point) -> int:
    """Exact sign of the cross product (b - a) x (c - a)."""
    ax, ay, bx, by, cx, cy = a.x, a.y, b.x, b.y, c.x, c.y
    if (
        type(ax) is Fraction and type(ay) is Fraction and type(bx) is Fraction
        and type(by) is Fraction and type(cx) is Fraction and type(cy) is Fraction
    ):
        return kernels.orient_sign(
            ax.numerator, ax.denominator, ay.numerator, ay.denominator,
            bx.numerator, bx.denominator, by.numerator, by.denominator,
            cx.numerator, cx.denominator, cy.numerator, cy.denominator,
        )
    return sgn(cross(psub(b, a), psub(c, a)))


def on_segment(q: Point, a: Point, b: Point, closed: bool = True) -> bool:
    """q lies on segment ab (collinearity included in the test)."""
    if orient(a, b, q) != 0:
        return False
    if a == b:
        return q == a if closed else False
    s1 = sgn(dot(psub(q, a), psub(b, a)))
    s2 = sgn(dot(psub(q, b), psub(a, b)))
    if closed:
        return s1 >= 0 and s2 >= 0
    return s1 > 0 and s2 > 0


def _param_on_line(p: Point, a: Point, b: Point) -> Scalar:
    """Parameter t with p = a + t*(b-a), assuming collinearity."""
    d = psub(b, a)
    dd = dot(d, d)
    return dot(psub(p, a), d) / dd


@dataclass(frozen=True)
class SegEvent:
    kind: str          # "proper" | "touch" | "overlap"
    t0: Scalar         # parameter on the probe segment
    t1: Scalar | None = None


def classify_segment_vs_edge(p: Point, q: Point, a: Point, b: Point) -> Optional[SegEvent]:
    """How does probe segment pq meet edge ab?  None if disjoint.

    "proper": interiors cross transversally (a boundary crossing).
    "overlap": collinear overlap, [t0, t1] on pq.
    "touch": a single shared point (grazing), at t0 on pq.
    """
    o1 = orient(p, q, a)
    o2 = orient(p, q, b)
    o3 = orient(a, b, p)
    o4 = orient(a, b, q)
    if o1 == 0 and o2 == 0:
        # collinear: project onto pq
        if p == q:
            return SegEvent("touch", Fraction(0)) if on_segment(p, a, b) else None
        ta = _param_on_line(a, p, q)
        tb = _param_on_line(b, p, q)
        lo, hi = (ta, tb) if ta <= tb else (tb, ta)
        lo2 = max(lo, Fraction(0))
        hi2 = min(hi, Fraction(1))
        if lo2 > hi2:
            return None
        if lo2 == hi2:
            return SegEvent("touch", lo2)
        return SegEvent("overlap", lo2, hi2)
    if o1 != o2 and o3 != o4 and o1 * o2 < 0 and o3 * o4 < 0:
        # strict transversal crossing of both interiors
        d = psub(q, p)
        e = psub(b, a)
        denom = cross(d, e)
        t = cross(psub(a, p), e) / denom
        return SegEvent("proper", t)
    # touching cases: at least one endpoint lies on the other segment
    ts: list[Scalar] = []
    if o1 == 0 and on_segment(a, p, q):
        ts.append(_param_on_line(a, p, q) if p != q else Fraction(0))
    if o2 == 0 and on_segment(b, p, q):
        ts.append(_param_on_line(b, p, q) if p != q else Fraction(0))
    if o3 == 0 and on_segment(p, a, b):
        ts.append(Fraction(0))
    if o4 == 0 and on_segment(q, a, b):
        ts.append(Fraction(1))
    if not ts:
        return None
    return SegEvent("touch", min(ts))


class PolygonWithHoles:
    """Exact polygon: one outer ring (CCW) plus hole rings (CW)."""

    def __init__(self, outer: Sequence[Point], holes: Sequence[Sequence[Point]] = (), validate: bool = True):
        self.outer: tuple[Point, ...] = tuple(Point(x, y) for x, y in outer)
        self.holes: tuple[tuple[Point, ...], ...] = tuple(
            tuple(Point(x, y) for x, y in h) for h in holes
        )
        self._cache: dict = {}
        if validate:
            self._validate()

    # -- structure -------------------------------------------------------

    @property
    def rings(self) -> list[tuple[Point, ...]]:
        return [self.outer, *self.holes]

    def vertices(self) -> list[Point]:
        out = list(self.outer)
        for h in self.holes:
            out.extend(h)
        return out

    def vertex_set(self) -> frozenset[Point]:
        key = "vertex_set"
        if key not in self._cache:
            self._cache[key] = frozenset(self.vertices())
        return self._cache[key]

    def edges(self) -> list[tuple[int, int, Point, Point]]:
        """(ring index, vertex index, a, b) for every boundary edge a->b."""
        key = "edges"
        if key not in self._cache:
            out = []
            for ri, ring in enumerate(self.rings):
                n = len(ring)
                for i in range(n):
                    out.append((ri, i, ring[i], ring[(i + 1) % n]))
            self._cache[key] = out
        return self._cache[key]

    def __eq__(self, other):
        return (
            isinstance(other, PolygonWithHoles)
            and self.outer == other.outer
            and self.holes == other.holes
        )

    def __hash__(self):
        return hash((self.outer, self.holes))

    # -- validation ------------------------------------------------------

    def _validate(self) -> None:
        for ri, ring in enumerate(self.rings):
            if len(ring) < 3:
                raise PolygonValidationError("ring has fewer than 3 vertices", ri)
            if len(set(ring)) != len(ring):
                raise PolygonValidationError("ring repeats a vertex", ri)
            n = len(ring)
            for i in range(n):
                a, b, c = ring[i], ring[(i + 1) % n], ring[(i + 2) % n]
                if orient(a, b, c) == 0:
                    raise PolygonValidationError(
                        "three consecutive collinear vertices", ri, (i + 1) % n
                    )
            # simplicity: no two non-adjacent edges intersect
            edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    if j == i or (j == (i + 1) % n) or ((j + 1) % n == i):
                        continue
                    ev = classify_segment_vs_edge(*edges[i], *edges[j])
                    if ev is not None:
                        raise PolygonValidationError("ring is not simple", ri, i)
        if _ring_area2(self.outer) <= 0:
            raise PolygonValidationError("outer ring must be counterclockwise", 0)
        for hi, h in enumerate(self.holes):
            if _ring_area2(h) >= 0:
                raise PolygonValidationError("hole ring must be clockwise", hi + 1)
        # rings pairwise disjoint, holes strictly inside the outer ring
        rings = self.rings
        for i in range(len(rings)):
            for j in range(i + 1, len(rings)):
                for a, b in _ring_edges(rings[i]):
                    for c, d in _ring_edges(rings[j]):
                        if classify_segment_vs_edge(a, b, c, d) is not None:
                            raise PolygonValidationError("rings intersect", j)
        for hi, h in enumerate(self.holes):
            if not _point_in_ring(h[0], self.outer):
                raise PolygonValidationError("hole not inside outer ring", hi + 1)
            for hj, other in enumerate(self.holes):
                if hj != hi and _point_in_ring(h[0], other):
                    raise PolygonValidationError("hole nested inside another hole", hi + 1)

    # -- membership ------------------------------------------------------

    def on_boundary(self, p: Point) -> bool:
        return any(on_segment(p, a, b) for _, _, a, b in self.edges())

    def contains(self, p: Point) -> bool:
        """Closed membership: boundary points count as inside."""
        if self.on_boundary(p):
            return True
        if not _point_in_ring(p, self.outer):
            return False
        return not any(_point_in_ring(p, h) for h in self.holes)

    def strictly_inside(self, p: Point) -> bool:
        return self.contains(p) and not self.on_boundary(p)

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        enc = lambda ring: [[scalar_to_json(p.x), scalar_to_json(p.y)] for p in ring]
        return {"outer": enc(self.outer), "holes": [enc(h) for h in self.holes]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PolygonWithHoles":
        def dec(ring, ri):
            pts = []
            for vi, pair in enumerate(ring):
                try:
                    pts.append(Point(scalar_from_json(pair[0]), scalar_from_json(pair[1])))
                except (ValueError, IndexError, TypeError) as exc:
                    raise PolygonValidationError(f"bad coordinate: {exc}", ri, vi)
            return pts

        if "outer" not in obj:
            raise PolygonValidationError("missing 'outer' ring")
        outer = dec(obj["outer"], 0)
        holes = [dec(h, i + 1) for i, h in enumerate(obj.get("holes", []))]
        return cls(outer, holes)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "PolygonWithHoles":
        return cls.from_json_obj(json.loads(text))

    def float_rings(self) -> list[list[tuple[float, float]]]:
        return [[(scalar_float(p.x), scalar_float(p.y)) for p in ring] for ring in self.rings]

    def __repr__(self):
        return f"PolygonWithHoles({len(self.outer)} outer, {len(self.holes)} holes)"


def _ring_edges(ring: Sequence[Point]):
    n = len(ring)
    for i in range(n):
        yield ring[i], ring[(i + 1) % n]


def _ring_area2(ring: Sequence[Point]) -> Scalar:
    total = Fraction(0)
    for a, b in _ring_edges(ring):
        total = total + cross(a, b)
    return total


def _point_in_ring(p: Point, ring: Sequence[Point]) -> bool:
    """Strict interior test by ray parity; boundary points are NOT handled here."""
    inside = False
    for a, b in _ring_edges(ring):
        a_above = sgn(a.y - p.y) > 0
        b_above = sgn(b.y - p.y) > 0
        if a_above != b_above:
            # x coordinate of the crossing of edge ab with the horizontal line
            t = (p.y - a.y) / (b.y - a.y)
            xc = a.x + t * (b.x - a.x)
            if sgn(xc - p.x) > 0:
                inside = not inside
    return inside


def point_in_closed_ring(p: Point, ring: Sequence[Point]) -> bool:
    if any(on_segment(p, a, b) for a, b in _ring_edges(ring)):
        return True
    return _point_in_ring(p, ring)


# -- visibility ------------------------------------------------------------


def visible(P: PolygonWithHoles, p: Point, q: Point) -> bool:
    """True iff the closed segment pq lies in P (boundary contact allowed)."""
    if not P.contains(p):
        raise PointOutsideError(f"point {p} outside polygon")
    if not P.contains(q):
        raise PointOutsideError(f"point {q} outside polygon")
    if p == q:
        return True
    values = {scalar_key(Fraction(0)): Fraction(0), scalar_key(Fraction(1)): Fraction(1)}
    overlaps: list[tuple[Scalar, Scalar]] = []
    for _, _, a, b in P.edges():
        ev = classify_segment_vs_edge(p, q, a, b)
        if ev is None:
            continue
        if ev.kind == "proper":
            return False
        if ev.kind == "overlap":
            overlaps.append((ev.t0, ev.t1))
            for t in (ev.t0, ev.t1):
                values[scalar_key(t)] = t
        else:
            values[scalar_key(ev.t0)] = ev.t0
    ts = sorted(values.values())
    d = psub(q, p)
    for t0, t1 in zip(ts, ts[1:]):
        if t0 == t1:
            continue
        if any(lo <= t0 and t1 <= hi for lo, hi in overlaps):
            continue  # runs along the boundary: inside
        tm = (t0 + t1) / 2
        m = Point(p.x + tm * d.x, p.y + tm * d.y)
        if not P.contains(m):
            return False
    return True


def fully_visible(P: PolygonWithHoles, p: Point, q: Point) -> bool:
    """Visible with no polygon vertex strictly inside segment pq."""
    if not visible(P, p, q):
        return False
    for v in P.vertex_set():
        if v != p and v != q and on_segment(v, p, q, closed=False):
            return False
    return True


def segment_in_open_interior(P: PolygonWithHoles, p: Point, q: Point) -> bool:
    """Open segment pq lies strictly inside P (endpoints may be on the boundary)."""
    if p == q:
        return False
    for _, _, a, b in P.edges():
        ev = classify_segment_vs_edge(p, q, a, b)
        if ev is None:
            continue
        if ev.kind in ("proper", "overlap"):
            return False
        if Fraction(0) < ev.t0 < Fraction(1):
            return False
    mid = Point((p.x + q.x) / 2, (p.y + q.y) / 2)
    return P.strictly_inside(mid)


# -- visibility region -------------------------------------------------------


class RegionPiece(NamedTuple):
    a: Point
    b: Point
    a_full_vertex: bool
    b_full_vertex: bool
    edge: tuple[int, int]  # (ring, vertex index) of the supporting edge


@dataclass(frozen=True)
class VisibilityRegion:
    viewpoint: Point
    pieces: tuple[RegionPiece, ...]

    def endpoints(self) -> list[Point]:
        out = []
        for pc in self.pieces:
            out.append(pc.a)
            out.append(pc.b)
        return out

    def full_vertices(self) -> list[Point]:
        out: list[Point] = []
        seen = set()
        for pc in self.pieces:
            for pt, flag in ((pc.a, pc.a_full_vertex), (pc.b, pc.b_full_vertex)):
                if flag and pt not in seen:
                    seen.add(pt)
                    out.append(pt)
        return out


def _angle_cmp(d1: Point, d2: Point) -> int:
    h1 = 0 if (sgn(d1.y) > 0 or (sgn(d1.y) == 0 and sgn(d1.x) > 0)) else 1
    h2 = 0 if (sgn(d2.y) > 0 or (sgn(d2.y) == 0 and sgn(d2.x) > 0)) else 1
    if h1 != h2:
        return -1 if h1 < h2 else 1
    c = sgn(cross(d1, d2))
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def _same_direction(d1: Point, d2: Point) -> bool:
    return sgn(cross(d1, d2)) == 0 and sgn(dot(d1, d2)) > 0


def _ray_hit(p: Point, d: Point, a: Point, b: Point):
    """First intersection of ray p + t*d (t>0) with segment ab; None if none.

    Collinear overlaps are ignored here (handled by the ray-piece pass)."""
    e = psub(b, a)
    denom = cross(d, e)
    if sgn(denom) == 0:
        return None
    w = psub(a, p)
    t = cross(w, e) / denom
    s = cross(w, d) / denom
    if sgn(t) <= 0:
        return None
    if sgn(s) < 0 or sgn(s - 1) > 0:
        return None
    return t, Point(p.x + t * d.x, p.y + t * d.y)


def visibility_region(P: PolygonWithHoles, p: Point) -> VisibilityRegion:
    """Exact decomposition of the boundary visible from p, angle-ordered.

    Endpoints that coincide with fully visible vertices are flagged.
    Deterministic: critical directions sorted by exact angle, pieces merged
    to maximal sub-segments, collinear boundary runs emitted on their ray.
    """
    cache = P._cache.setdefault("regions", {})
    if p in cache:
        return cache[p]
    if not P.contains(p):
        raise PointOutsideError(f"viewpoint {p} outside polygon")

    dirs: list[Point] = []
    for v in P.vertices():
        d = psub(v, p)
        if d.x == 0 and d.y == 0:
            continue
        if not any(_same_direction(d, d2) for d2 in dirs):
            dirs.append(d)
    for ax in (Point(Fraction(1), Fraction(0)), Point(Fraction(0), Fraction(1)),
               Point(Fraction(-1), Fraction(0)), Point(Fraction(0), Fraction(-1))):
        if not any(_same_direction(ax, d2) for d2 in dirs):
            dirs.append(ax)
    dirs.sort(key=cmp_to_key(_angle_cmp))

    edges = P.edges()
    vset = P.vertex_set()

    def endpoint_flag(pt: Point) -> bool:
        return pt in vset and fully_visible(P, p, pt)

    raw: list[RegionPiece] = []
    nd = len(dirs)
    for i in range(nd):
        d = dirs[i]
        raw.extend(_ray_pieces(P, p, d, edges, endpoint_flag))
        d2 = dirs[(i + 1) % nd]
        mid = padd(d, d2)
        if mid.x == 0 and mid.y == 0:
            continue  # opposite criticals; axis insertion prevents wide gaps
        best = None
        for ri, vi, a, b in edges:
            hit = _ray_hit(p, mid, a, b)
            if hit is None:
                continue
            if best is None or hit[0] < best[0]:
                best = (hit[0], hit[1], (ri, vi), a, b)
        if best is None:
            continue
        t_hit, h, eref, a, b = best
        mchk = Point((p.x + h.x) / 2, (p.y + h.y) / 2)
        if not P.contains(mchk):
            continue  # sector faces the exterior
        e1 = _ray_hit_line(p, d, a, b)
        e2 = _ray_hit_line(p, d2, a, b)
        if e1 is None or e2 is None:
            continue
        raw.append(RegionPiece(e1, e2, endpoint_flag(e1), endpoint_flag(e2), eref))

    merged = _merge_pieces(raw)
    region = VisibilityRegion(p, tuple(merged))
    cache[p] = region
    return region


def _ray_hit_line(p: Point, d: Point, a: Point, b: Point) -> Optional[Point]:
    """Intersection of ray p + t*d (t >= 0) with the full line through ab."""
    e = psub(b, a)
    denom = cross(d, e)
    if sgn(denom) == 0:
        return None
    w = psub(a, p)
    t = cross(w, e) / denom
    if sgn(t) < 0:
        return None
    return Point(p.x + t * d.x, p.y + t * d.y)


def _ray_pieces(P, p, d, edges, endpoint_flag) -> list[RegionPiece]:
    """Visible collinear boundary runs along the ray p + t*d, t > 0."""
    collinear: list[tuple[Scalar, Scalar, tuple[int, int]]] = []
    crossings: list[Scalar] = []
    dd = dot(d, d)
    tip = padd(p, d)
    for ri, vi, a, b in edges:
        oa = orient(p, tip, a)
        ob = orient(p, tip, b)
        if oa == 0 and ob == 0:
            ta = dot(psub(a, p), d) / dd
            tb = dot(psub(b, p), d) / dd
            lo, hi = (ta, tb) if ta <= tb else (tb, ta)
            if sgn(hi) <= 0:
                continue
            lo = max(lo, Fraction(0))
            if lo < hi:
                collinear.append((lo, hi, (ri, vi)))
        elif oa * ob < 0:
            e = psub(b, a)
            denom = cross(d, e)
            t = cross(psub(a, p), e) / denom
            s = cross(psub(a, p), d) / denom
            if sgn(t) > 0 and 0 < s < 1:
                crossings.append(t)
            # crossing exactly at an edge endpoint is handled as a vertex event
    if not collinear:
        return []
    # transversal boundary pass through a vertex lying on the ray also blocks
    for ring in P.rings:
        n = len(ring)
        for i in range(n):
            v = ring[i]
            if v == p or orient(p, tip, v) != 0 or sgn(dot(psub(v, p), d)) <= 0:
                continue
            w1, w2 = ring[(i - 1) % n], ring[(i + 1) % n]
            s1 = orient(p, tip, w1)
            s2 = orient(p, tip, w2)
            if s1 * s2 < 0:
                crossings.append(dot(psub(v, p), d) / dd)
    t_block = min(crossings) if crossings else None
    collinear.sort(key=cmp_to_key(lambda x, y: sgn(x[0] - y[0]) or sgn(x[1] - y[1])))
    out: list[RegionPiece] = []
    reach = Fraction(0)
    for lo, hi, eref in collinear:
        if t_block is not None and lo >= t_block:
            break
        if lo > reach:
            tm = (reach + lo) / 2
            m = Point(p.x + tm * d.x, p.y + tm * d.y)
            if not P.contains(m):
                break
        pa = Point(p.x + lo * d.x, p.y + lo * d.y)
        pb = Point(p.x + hi * d.x, p.y + hi * d.y)
        out.append(RegionPiece(pa, pb, endpoint_flag(pa), endpoint_flag(pb), eref))
        reach = max(reach, hi)
    return out


def _merge_pieces(pieces: list[RegionPiece]) -> list[RegionPiece]:
    out: list[RegionPiece] = []
    for pc in pieces:
        if pc.a == pc.b:
            continue
        if out:
            last = out[-1]
            if last.edge == pc.edge and last.b == pc.a:
                out[-1] = RegionPiece(last.a, pc.b, last.a_full_vertex, pc.b_full_vertex, pc.edge)
                continue
        out.append(pc)
    if len(out) > 1 and out[0].edge == out[-1].edge and out[-1].b == out[0].a:
        first = out.pop(0)
        out[-1] = RegionPiece(out[-1].a, first.b, out[-1].a_full_vertex, first.b_full_vertex, first.edge)
    # drop exact duplicates (a ray piece can coincide with a sector closure)
    seen = set()
    dedup = []
    for pc in out:
        k = (pc.a, pc.b, pc.edge)
        if k not in seen:
            seen.add(k)
            dedup.append(pc)
    return dedup


# -- visibility graph and paths ----------------------------------------------


@dataclass
class VisibilityGraph:
    points: list[Point]
    index: dict[Point, int]
    adj: dict[int, set[int]]
    fully: set[tuple[int, int]] = field(default_factory=set)

    def neighbors(self, i: int) -> set[int]:
        return self.adj.get(i, set())


def visibility_graph(P: PolygonWithHoles) -> VisibilityGraph:
    key = "visgraph"
    if key in P._cache:
        return P._cache[key]
    pts = P.vertices()
    idx = {pt: i for i, pt in enumerate(pts)}
    adj: dict[int, set[int]] = {i: set() for i in range(len(pts))}
    fully: set[tuple[int, int]] = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if visible(P, pts[i], pts[j]):
                adj[i].add(j)
                adj[j].add(i)
                if fully_visible(P, pts[i], pts[j]):
                    fully.add((i, j))
                    fully.add((j, i))
    g = VisibilityGraph(pts, idx, adj, fully)
    if not _graph_connected(adj, len(pts)):
        raise GeometryError("visibility graph is not connected")
    P._cache[key] = g
    return g


def _graph_connected(adj: dict[int, set[int]], n: int) -> bool:
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


class UnreachableError(GeometryError):
    pass


def dijkstra_path(
    points: Sequence[Point],
    adj: dict[int, Iterable[int]],
    source: int,
    target: int,
) -> list[int]:
    """Geodesic-minimal path; ties broken lexicographically on the index sequence."""
    best: dict[int, tuple[PathLength, tuple[int, ...]]] = {source: (PathLength(), (source,))}
    done: set[int] = set()
    while True:
        cur = None
        for node, (dist, path) in best.items():
            if node in done:
                continue
            if cur is None:
                cur = (node, dist, path)
            else:
                c = dist._cmp(cur[1])
                if c < 0 or (c == 0 and path < cur[2]):
                    cur = (node, dist, path)
        if cur is None:
            raise UnreachableError(f"vertex {target} unreachable")
        node, dist, path = cur
        if node == target:
            return list(path)
        done.add(node)
        for nb in adj.get(node, ()):
            if nb in done:
                continue
            nd = dist + PathLength.of_sq(dist_sq(points[node], points[nb]))
            npath = path + (nb,)
            old = best.get(nb)
            if old is None:
                best[nb] = (nd, npath)
            else:
                c = nd._cmp(old[0])
                if c < 0 or (c == 0 and npath < old[1]):
                    best[nb] = (nd, npath)


def shortest_vertex_path(G: VisibilityGraph, P: PolygonWithHoles, u: int, v: int) -> list[int]:
    if u == v:
        return [u]
    return dijkstra_path(G.points, G.adj, u, v)


# -- centroid ----------------------------------------------------------------


def centroid(P: PolygonWithHoles) -> Point:
    a2 = Fraction(0)
    cx = Fraction(0)
    cy = Fraction(0)
    for ring in P.rings:
        for a, b in _ring_edges(ring):
            w = cross(a, b)
            a2 = a2 + w
            cx = cx + (a.x + b.x) * w
            cy = cy + (a.y + b.y) * w
    if sgn(a2) == 0:
        raise GeometryError("degenerate polygon area")
    return Point(cx / (3 * a2), cy / (3 * a2))


def centroid_in_hole(P: PolygonWithHoles) -> tuple[Point, bool]:
    c = centroid(P)
    in_hole = any(point_in_closed_ring(c, h) for h in P.holes)
    return c, in_hole


# -- similarity transforms ----------------------------------------------------


@dataclass(frozen=True)
class Similarity:
    """p -> t + M p with M = s * rotation (optionally composed with reflection)."""

    m00: Scalar
    m01: Scalar
    m10: Scalar
    m11: Scalar
    tx: Scalar
    ty: Scalar

    def apply(self, p: Point) -> Point:
        return Point(
            self.tx + self.m00 * p.x + self.m01 * p.y,
            self.ty + self.m10 * p.x + self.m11 * p.y,
        )

    def apply_vec(self, v: Point) -> Point:
        return Point(self.m00 * v.x + self.m01 * v.y, self.m10 * v.x + self.m11 * v.y)

    def det_sign(self) -> int:
        return sgn(self.m00 * self.m11 - self.m01 * self.m10)

    def compose(self, other: "Similarity") -> "Similarity":
        t = self.apply(Point(other.tx, other.ty))
        return Similarity(
            self.m00 * other.m00 + self.m01 * other.m10,
            self.m00 * other.m01 + self.m01 * other.m11,
            self.m10 * other.m00 + self.m11 * other.m10,
            self.m10 * other.m01 + self.m11 * other.m11,
            t.x,
            t.y,
        )

    def inverse(self) -> "Similarity":
        det = self.m00 * self.m11 - self.m01 * self.m10
        i00 = self.m11 / det
        i01 = -self.m01 / det
        i10 = -self.m10 / det
        i11 = self.m00 / det
        tx = -(i00 * self.tx + i01 * self.ty)
        ty = -(i10 * self.tx + i11 * self.ty)
        return Similarity(i00, i01, i10, i11, tx, ty)

    @classmethod
    def identity(cls) -> "Similarity":
        one, zero = Fraction(1), Fraction(0)
        return cls(one, zero, zero, one, zero, zero)

    @classmethod
    def mapping_segment(cls, a: Point, b: Point, a2: Point, b2: Point, flip: bool = False) -> "Similarity":
        """The similarity sending a->a2 and b->b2 (orientation flipped if flip)."""
        f1 = cls.to_unit_frame(a, b)
        f2 = cls.to_unit_frame(a2, b2)
        if flip:
            refl = cls(Fraction(1), Fraction(0), Fraction(0), Fraction(-1), Fraction(0), Fraction(0))
            return f2.inverse().compose(refl).compose(f1)
        return f2.inverse().compose(f1)

    @classmethod
    def to_unit_frame(cls, a: Point, b: Point) -> "Similarity":
        """Similarity sending a->(0,0), b->(1,0), preserving orientation."""
        u = psub(b, a)
        uu = dot(u, u)
        m00 = u.x / uu
        m01 = u.y / uu
        m10 = -u.y / uu
        m11 = u.x / uu
        t = cls(m00, m01, m10, m11, Fraction(0), Fraction(0)).apply(a)
        return cls(m00, m01, m10, m11, -t.x, -t.y)


def transform_polygon(P: PolygonWithHoles, T: Similarity) -> PolygonWithHoles:
    flip = T.det_sign() < 0
    rings = []
    for ring in P.rings:
        pts = [T.apply(pt) for pt in ring]
        if flip:
            pts = list(reversed(pts))
        rings.append(pts)
    return PolygonWithHoles(rings[0], rings[1:], validate=False)
