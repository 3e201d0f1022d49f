"""Making the arena simply connected and walkable.

Two augmentation styles live here:

* general: hole-removing diagonals (axis-respecting for axially symmetric
  polygons) and the boundary tour that traverses every polygon edge once
  and every cut twice, realized as a face walk with the interior on the
  left;
* central: the branch partition around the central polygon Q: branches cut
  along their applicable symmetry axis, remaining holes removed by radial
  cuts used as ear-clipping bridges, the dual tree rooted at Q, and the
  j-tours walked over the partition.

Everything is exact and deterministic.  Twin sub-branches are mirrored by
construction (the reflection is applied to the computed triangulation)
rather than re-derived, so their triangulations are exact mirror images.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional, Sequence

from polymeet.geometry import (
    GeometryError,
    Point,
    PolygonWithHoles,
    Similarity,
    _angle_cmp,
    _point_in_ring,
    classify_segment_vs_edge,
    cross,
    dot,
    on_segment,
    orient,
    point_in_closed_ring,
    psub,
    segment_in_open_interior,
    sgn,
)
from polymeet.symmetry import (
    PivotChoice,
    SymmetryProfile,
    select_pivot_vertex_improved,
    symmetricity,
)

F = Fraction


class ConstructionError(GeometryError):
    pass


Segment = tuple[Point, Point]


def _seg_key(u: Point, v: Point):
    a = (u.x, u.y)
    b = (v.x, v.y)
    return (a, b) if a <= b else (b, a)


# -- face walk over rings + cuts ------------------------------------------------


class WalkGraph:
    """Planar boundary structure; faces are walked with the interior on the left."""

    def __init__(self):
        self.adj: dict[Point, list[Point]] = {}
        self._sorted = False

    def add_edge(self, u: Point, v: Point) -> None:
        if u == v:
            raise ConstructionError("degenerate walk edge")
        self.adj.setdefault(u, [])
        self.adj.setdefault(v, [])
        if v not in self.adj[u]:
            self.adj[u].append(v)
        if u not in self.adj[v]:
            self.adj[v].append(u)

    def _sort(self) -> None:
        if not self._sorted:
            for p in self.adj:
                self.adj[p].sort(
                    key=cmp_to_key(lambda a, b, p=p: _angle_cmp(psub(a, p), psub(b, p)))
                )
            self._sorted = True

    def face_walk(self, u: Point, v: Point) -> list[Point]:
        """Closed walk of the face left of u->v; returns the node cycle."""
        self._sort()
        walk = [u]
        cur = (u, v)
        guard = 0
        limit = 10 * sum(len(n) for n in self.adj.values()) + 16
        while True:
            guard += 1
            if guard > limit:
                raise ConstructionError("face walk did not close")
            a, b = cur
            walk.append(b)
            nbrs = self.adj[b]
            i = nbrs.index(a)
            cur = (b, nbrs[(i - 1) % len(nbrs)])
            if cur == (u, v):
                break
        return walk[:-1]


def _insert_points_on_ring(ring: Sequence[Point], extra: Sequence[Point]) -> list[Point]:
    out: list[Point] = []
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        out.append(a)
        on_edge = [p for p in extra if p != a and p != b and on_segment(p, a, b)]
        d = psub(b, a)
        on_edge.sort(key=cmp_to_key(lambda p, q: sgn(dot(psub(p, a), d) - dot(psub(q, a), d))))
        for p in on_edge:
            if p != out[-1]:
                out.append(p)
    return out


# -- general augmentation ---------------------------------------------------------


@dataclass
class AugmentedPolygon:
    base: PolygonWithHoles
    cuts: tuple[Segment, ...]
    pivot: PivotChoice
    _tours: dict = field(default_factory=dict)

    def tour(self, direction: str) -> tuple[Point, ...]:
        if direction not in ("CW", "CCW"):
            raise ValueError("direction must be CW or CCW")
        if "CCW" not in self._tours:
            self._tours["CCW"] = tuple(_boundary_walk(self.base, self.cuts, self.pivot.location))
        if direction == "CW" and "CW" not in self._tours:
            ccw = self._tours["CCW"]
            self._tours["CW"] = (ccw[0],) + tuple(reversed(ccw[1:]))
        return self._tours[direction]


def boundary_tour(aug: AugmentedPolygon, direction: str) -> tuple[Point, ...]:
    return aug.tour(direction)


def _boundary_walk(P: PolygonWithHoles, cuts: Sequence[Segment], start: Point) -> list[Point]:
    g = WalkGraph()
    extra = [start]
    for a, b in cuts:
        extra.append(a)
        extra.append(b)
    ring_chains = []
    for ring in P.rings:
        chain = _insert_points_on_ring(ring, extra)
        ring_chains.append(chain)
        for i in range(len(chain)):
            g.add_edge(chain[i], chain[(i + 1) % len(chain)])
    for a, b in cuts:
        g.add_edge(a, b)
    for chain in ring_chains:
        if start in chain:
            i = chain.index(start)
            walk = g.face_walk(start, chain[(i + 1) % len(chain)])
            break
    else:
        raise ConstructionError("tour start point not on the boundary")
    _check_walk(cuts, ring_chains, walk)
    return walk


def _check_walk(cuts, ring_chains, walk):
    seen: dict[tuple, int] = {}
    for u, v in zip(walk, walk[1:] + walk[:1]):
        seen[_seg_key(u, v)] = seen.get(_seg_key(u, v), 0) + 1
    for chain in ring_chains:
        for i in range(len(chain)):
            u, v = chain[i], chain[(i + 1) % len(chain)]
            if seen.get(_seg_key(u, v), 0) != 1:
                raise ConstructionError("boundary edge not traversed exactly once")
    for a, b in cuts:
        if seen.get(_seg_key(a, b), 0) != 2:
            raise ConstructionError("cut not traversed exactly twice")


def _vertex_component(P: PolygonWithHoles, flat_id: int) -> int:
    n = len(P.outer)
    if flat_id < n:
        return 0
    flat_id -= n
    for hi, h in enumerate(P.holes):
        if flat_id < len(h):
            return hi + 1
        flat_id -= len(h)
    raise IndexError


def _valid_new_cut(P: PolygonWithHoles, cuts: list[Segment], a: Point, b: Point) -> bool:
    if not segment_in_open_interior(P, a, b):
        return False
    for c, d in cuts:
        ev = classify_segment_vs_edge(a, b, c, d)
        if ev is None:
            continue
        if ev.kind != "touch":
            return False
        if not (ev.t0 == 0 or ev.t0 == 1):
            return False
        pt = a if ev.t0 == 0 else b
        if pt != c and pt != d:
            return False
    return True


def _pair_key_factory(profile: SymmetryProfile, pivot: PivotChoice):
    """Deterministic, similarity-invariant order on candidate cuts, anchored
    at the pivot; handedness-free when the polygon is axially symmetric."""
    c = profile.center
    hands = (1, -1) if profile.axes else (profile.canonical_handedness,)
    frames = []
    for h in hands:
        fr = Similarity.to_unit_frame(c, pivot.location)
        if h < 0:
            refl = Similarity(F(1), F(0), F(0), F(-1), F(0), F(0))
            fr = refl.compose(fr)
        frames.append(fr)

    def key(u: Point, w: Point):
        variants = []
        for fr in frames:
            cu, cw = fr.apply(u), fr.apply(w)
            pair = sorted([(cu.x, cu.y), (cw.x, cw.y)])
            variants.append(tuple(pair))
        return min(variants)

    return key


def augment_general(
    P: PolygonWithHoles, pivot: PivotChoice, profile: SymmetryProfile | None = None
) -> AugmentedPolygon:
    """Hole-removing cut set for the general meeting algorithm.

    Axial pivots get axis sub-segment cuts for axis-crossing holes and
    mirror diagonal pairs for the rest; otherwise deterministic canonical
    diagonals.  No cut is incident to the pivot."""
    if profile is None:
        profile = symmetricity(P)
    if not P.holes:
        return AugmentedPolygon(P, (), pivot)
    pts = P.vertices()
    parent = list(range(1 + len(P.holes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    def connected():
        return len({find(i) for i in range(len(parent))}) == 1

    cuts: list[Segment] = []
    key_fn = _pair_key_factory(profile, pivot)
    if pivot.axis is not None:
        _axis_chain_cuts(P, pivot.axis, pivot.location, cuts, find, union)
        refl = _axis_reflection(profile, pivot.axis)
        a0, a1 = pivot.axis
        while not connected():
            cand = []
            for i, u in enumerate(pts):
                su = orient(a0, a1, u)
                if su == 0:
                    continue
                cu = find(_vertex_component(P, i))
                for j, w in enumerate(pts):
                    if j == i or orient(a0, a1, w) != su:
                        continue
                    cw = find(_vertex_component(P, j))
                    if cu == cw:
                        continue
                    if not _valid_new_cut(P, cuts, u, w):
                        continue
                    mu, mw = refl.transform.apply(u), refl.transform.apply(w)
                    if not _valid_new_cut(P, cuts + [(u, w)], mu, mw):
                        continue
                    cand.append((key_fn(u, w), u, w, mu, mw, i, j))
            if not cand:
                raise ConstructionError("no valid symmetric diagonal found")
            cand.sort(key=lambda t: t[0])
            _, u, w, mu, mw, i, j = cand[0]
            cuts.append((u, w))
            union(_vertex_component(P, i), _vertex_component(P, j))
            if _seg_key(mu, mw) != _seg_key(u, w):
                cuts.append((mu, mw))
                union(_vertex_component(P, pts.index(mu)), _vertex_component(P, pts.index(mw)))
    else:
        while not connected():
            cand = []
            for i, u in enumerate(pts):
                if u == pivot.location:
                    continue
                cu = find(_vertex_component(P, i))
                for j in range(i + 1, len(pts)):
                    w = pts[j]
                    if w == pivot.location or find(_vertex_component(P, j)) == cu:
                        continue
                    if not _valid_new_cut(P, cuts, u, w):
                        continue
                    cand.append((key_fn(u, w), u, w, i, j))
            if not cand:
                raise ConstructionError("no valid diagonal found")
            cand.sort(key=lambda t: t[0])
            _, u, w, i, j = cand[0]
            cuts.append((u, w))
            union(_vertex_component(P, i), _vertex_component(P, j))
    return AugmentedPolygon(P, tuple(cuts), pivot)


def _axis_marks(region: PolygonWithHoles, axis) -> list[tuple]:
    """(param, point, ring index) of boundary-axis intersections, sorted."""
    a0, a1 = axis
    d = psub(a1, a0)
    dd = dot(d, d)
    dedup: dict = {}
    for ri, ring in enumerate(region.rings):
        n = len(ring)
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            sa = orient(a0, a1, a)
            sb = orient(a0, a1, b)
            if sa == 0:
                dedup[(a.x, a.y)] = (dot(psub(a, a0), d) / dd, a, ri)
            if sa * sb < 0:
                e = psub(b, a)
                t = cross(psub(a, a0), e) / cross(d, e)
                p = Point(a0.x + t * d.x, a0.y + t * d.y)
                dedup[(p.x, p.y)] = (dot(psub(p, a0), d) / dd, p, ri)
    marks = list(dedup.values())
    marks.sort(key=cmp_to_key(lambda x, y: sgn(x[0] - y[0])))
    return marks


def _axis_connectors(region: PolygonWithHoles, axis) -> list[tuple]:
    """(param pair, segment, ring pair) for interior gaps along the axis."""
    a0, a1 = axis
    d = psub(a1, a0)
    out = []
    marks = _axis_marks(region, axis)
    for (t1, p1, r1), (t2, p2, r2) in zip(marks, marks[1:]):
        if sgn(t2 - t1) == 0:
            continue
        tm = (t1 + t2) / 2
        mp = Point(a0.x + tm * d.x, a0.y + tm * d.y)
        if region.strictly_inside(mp):
            out.append(((t1, t2), (p1, p2), (r1, r2)))
    return out


def _axis_chain_cuts(P, axis, pivot_pt, cuts, find, union):
    a0, a1 = axis
    d = psub(a1, a0)
    dd = dot(d, d)
    tp = dot(psub(pivot_pt, a0), d) / dd
    conns = _axis_connectors(P, axis)
    # farthest from the pivot first, so the pivot-adjacent gap is never used
    conns.sort(key=cmp_to_key(
        lambda x, y: -sgn(_gap_dist(x[0], tp) - _gap_dist(y[0], tp))))
    for (t1, t2), (p1, p2), (r1, r2) in conns:
        if p1 == pivot_pt or p2 == pivot_pt:
            continue
        if find(r1) != find(r2):
            cuts.append((p1, p2))
            union(r1, r2)


def _gap_dist(ts, tp):
    t1, t2 = ts
    d1 = t1 - tp if sgn(t1 - tp) >= 0 else tp - t1
    d2 = t2 - tp if sgn(t2 - tp) >= 0 else tp - t2
    return d1 if sgn(d1 - d2) <= 0 else d2


def _axis_reflection(profile: SymmetryProfile, axis):
    a0, a1 = axis
    for g in profile.group:
        if g.is_reflection and g.transform.apply(a0) == a0 and g.transform.apply(a1) == a1:
            return g
    raise ConstructionError("no reflection found for the axis")


# -- branch partition --------------------------------------------------------------


@dataclass
class Piece:
    points: tuple[Point, Point, Point]   # CCW triangle
    side_ids: tuple[int, int, int]       # side i joins points[i] -> points[(i+1)%3]
    sub_branch: int
    depth: int = -1


@dataclass
class BranchPartition:
    base: PolygonWithHoles
    pivot_class: list[Point]
    q_ring: tuple[Point, ...]            # Q corners CCW with mouth midpoints inserted
    cuts: tuple[Segment, ...]
    pieces: list[Piece]
    side_kind: dict[int, str]            # "mouth" | "boundary" | "cut" | "diag"
    m: int
    t: int
    branch_count: int
    sub_branch_count: int
    _tours: dict = field(default_factory=dict)
    _diag_owner: dict = field(default_factory=dict)

    def schedule(self) -> "StageSchedule":
        return StageSchedule(self.m, self.t)

    def j_tour(self, j: int, direction: str, pivot: Point) -> tuple[Point, ...]:
        if not (0 <= j <= self.m):
            raise ValueError(f"j-tour index out of range: {j}")
        if direction not in ("CW", "CCW"):
            raise ValueError("direction must be CW or CCW")
        kc = (j, pivot)
        if kc not in self._tours:
            self._tours[kc] = tuple(_region_walk(self, j, pivot))
        if direction == "CCW":
            return self._tours[kc]
        ccw = self._tours[kc]
        return (ccw[0],) + tuple(reversed(ccw[1:]))


def build_branch_partition(
    P: PolygonWithHoles,
    profile: SymmetryProfile | None = None,
    central_class: list[int] | None = None,
) -> BranchPartition:
    default_call = profile is None and central_class is None
    if default_call and "branch_partition" in P._cache:
        return P._cache["branch_partition"]
    if profile is None:
        profile = symmetricity(P)
    if central_class is None:
        central_class, _ = select_pivot_vertex_improved(P, profile)
    pts = P.vertices()
    c = profile.center
    n_outer = len(P.outer)
    if any(v >= n_outer for v in central_class):
        raise ConstructionError("central class on a hole ring is not supported")
    corners = sorted(
        central_class,
        key=cmp_to_key(lambda a, b: _angle_cmp(psub(pts[a], c), psub(pts[b], c))),
    )
    k = len(corners)
    q_points = [pts[v] for v in corners]
    for i in range(k):
        a, b = q_points[i], q_points[(i + 1) % k]
        if not _is_polygon_edge(P, a, b) and not segment_in_open_interior(P, a, b):
            raise ConstructionError("central polygon is not empty within the arena")
    for h in P.holes:
        if point_in_closed_ring(h[0], q_points):
            raise ConstructionError("hole inside the central polygon")
    if k >= 3 and not point_in_closed_ring(c, q_points):
        raise ConstructionError("center not inside the central polygon")

    side_kind: dict[int, str] = {}
    counter = [0]

    def new_side(kind: str) -> int:
        sid = counter[0]
        counter[0] += 1
        side_kind[sid] = kind
        return sid

    pieces: list[Piece] = []
    all_cuts: list[Segment] = []
    q_ring_aug: list[Point] = []
    branch_count = 0
    sub_branch = 0

    arc_total = 0
    for i in range(k):
        arc_total += len(_outer_arc(P, corners[i], corners[(i + 1) % k])) - 1
    if arc_total != n_outer:
        raise ConstructionError("central class is not in outer-ring cyclic order")

    for i in range(k):
        ci, cj = corners[i], corners[(i + 1) % k]
        a, b = pts[ci], pts[cj]
        q_ring_aug.append(a)
        arc = _outer_arc(P, ci, cj)
        if len(arc) == 2:
            if not _is_polygon_edge(P, a, b):
                raise ConstructionError("two-vertex arc that is not an edge")
            continue
        branch_count += 1
        branch_outer = [pts[v] for v in arc]
        branch_holes = [h for h in P.holes if _point_in_ring(h[0], branch_outer)]
        branch = PolygonWithHoles(branch_outer, branch_holes, validate=False)
        axes = _branch_axes(profile, branch_outer)
        if len(axes) > 1:
            raise ConstructionError("branches with several axes are not supported")
        if not axes:
            tris, cuts = _triangulate_region(
                branch_outer, branch_holes, [(a, b)], [], c, a, sub_branch, new_side, side_kind
            )
            pieces.extend(tris)
            all_cuts.extend(cuts)
            sub_branch += 1
        else:
            axis = axes[0]
            mid = _axis_chord_midpoint(a, b, axis)
            q_ring_aug.append(mid)
            refl = _axis_reflection(profile, axis)
            axis_cuts = [seg for _, seg, _ in _axis_connectors(branch, axis)]
            all_cuts.extend(axis_cuts)
            left_ring, left_holes = _split_branch(branch, axis_cuts, a)
            tris, cuts = _triangulate_region(
                left_ring, left_holes, [(a, mid)], axis_cuts, c, a,
                sub_branch, new_side, side_kind,
            )
            pieces.extend(tris)
            all_cuts.extend(cuts)
            sub_branch += 1
            mirrored, mcuts = _mirror_triangles(tris, cuts, refl.transform, sub_branch, new_side, side_kind)
            pieces.extend(mirrored)
            all_cuts.extend(mcuts)
            sub_branch += 1

    _assign_depths(pieces, side_kind)
    part = BranchPartition(
        base=P,
        pivot_class=[pts[v] for v in central_class],
        q_ring=tuple(q_ring_aug),
        cuts=tuple(all_cuts),
        pieces=pieces,
        side_kind=side_kind,
        m=max((p.depth for p in pieces), default=0),
        t=len(pieces),
        branch_count=branch_count,
        sub_branch_count=sub_branch,
    )
    if default_call:
        P._cache.setdefault("branch_partition", part)
    return part


def _is_polygon_edge(P: PolygonWithHoles, a: Point, b: Point) -> bool:
    for _, _, u, v in P.edges():
        if (u, v) == (a, b) or (u, v) == (b, a):
            return True
    return False


def _outer_arc(P: PolygonWithHoles, ci: int, cj: int) -> list[int]:
    n = len(P.outer)
    arc = [ci]
    v = ci
    while v != cj:
        v = (v + 1) % n
        arc.append(v)
        if len(arc) > n:
            raise ConstructionError("outer arc walk failed")
    return arc


def _branch_axes(profile: SymmetryProfile, branch_outer: list[Point]):
    bset = frozenset((p.x, p.y) for p in branch_outer)
    refls = [g for g in profile.group if g.is_reflection]
    out = []
    for idx, g in enumerate(refls):
        img = frozenset(((q := g.transform.apply(p)).x, q.y) for p in branch_outer)
        if img == bset:
            out.append(profile.axes[idx])
    return out


def _axis_chord_midpoint(a: Point, b: Point, axis) -> Point:
    a0, a1 = axis
    d = psub(a1, a0)
    e = psub(b, a)
    denom = cross(d, e)
    if sgn(denom) == 0:
        raise ConstructionError("mouth chord parallel to the branch axis")
    s = cross(psub(a0, a), d) / cross(e, d)
    return Point(a.x + s * e.x, a.y + s * e.y)


def _split_branch(branch: PolygonWithHoles, axis_cuts: list[Segment], corner: Point):
    """Sub-branch on `corner`'s side of the axis: outer ring via a face walk
    of the branch boundary with the axis cuts added, plus untouched holes."""
    g = WalkGraph()
    extra = [p for seg in axis_cuts for p in seg]
    chains = []
    for ring in branch.rings:
        chain = _insert_points_on_ring(ring, extra)
        chains.append(chain)
        for i in range(len(chain)):
            g.add_edge(chain[i], chain[(i + 1) % len(chain)])
    for u, v in axis_cuts:
        g.add_edge(u, v)
    chain0 = chains[0]
    i = chain0.index(corner)
    ring = g.face_walk(corner, chain0[(i + 1) % len(chain0)])
    ring_set = set(ring)
    kept_holes = [h for h in branch.holes if not (set(h) & ring_set)]
    return ring, [list(h) for h in kept_holes]


def _mirror_triangles(tris, cuts, mirror, sub_branch, new_side, side_kind):
    diag_map: dict[int, int] = {}

    def mapped(sid: int) -> int:
        kind = side_kind[sid]
        if kind == "diag":
            if sid not in diag_map:
                diag_map[sid] = new_side("diag")
            return diag_map[sid]
        return new_side(kind)

    out = []
    for p in tris:
        p0, p1, p2 = p.points
        s01, s12, s20 = p.side_ids
        mpts = (mirror.apply(p0), mirror.apply(p2), mirror.apply(p1))
        msides = (mapped(s20), mapped(s12), mapped(s01))
        out.append(Piece(mpts, msides, sub_branch))
    mcuts = [(mirror.apply(u), mirror.apply(v)) for u, v in cuts]
    return out, mcuts


def _assign_depths(pieces: list[Piece], side_kind) -> None:
    diag_owner: dict[int, list[int]] = {}
    for idx, p in enumerate(pieces):
        for sid in p.side_ids:
            if side_kind[sid] == "diag":
                diag_owner.setdefault(sid, []).append(idx)
    for sid, owners in diag_owner.items():
        if len(owners) != 2:
            raise ConstructionError("internal diagonal not shared by two triangles")
    frontier = []
    for idx, p in enumerate(pieces):
        if any(side_kind[sid] == "mouth" for sid in p.side_ids):
            p.depth = 1
            frontier.append(idx)
    while frontier:
        nxt = []
        for idx in frontier:
            for sid in pieces[idx].side_ids:
                if side_kind[sid] != "diag":
                    continue
                for other in diag_owner[sid]:
                    if pieces[other].depth < 0:
                        pieces[other].depth = pieces[idx].depth + 1
                        nxt.append(other)
        frontier = nxt
    if any(p.depth < 0 for p in pieces):
        raise ConstructionError("dual graph is not a tree rooted at the central polygon")


# -- sub-branch triangulation -------------------------------------------------------


def _triangulate_region(
    ring_pts: list[Point],
    holes: list[list[Point]],
    mouth_segments: list[Segment],
    axis_cuts: list[Segment],
    center: Point,
    anchor: Point,
    sub_branch: int,
    new_side,
    side_kind,
):
    """Radial hole bridging followed by deterministic ear clipping.

    Returns (pieces, radial cut segments)."""
    ring = list(ring_pts)
    start = ring.index(anchor)
    ring = ring[start:] + ring[:start]

    def classify_edge(u: Point, v: Point) -> str:
        for ma, mb in mouth_segments:
            if on_segment(u, ma, mb) and on_segment(v, ma, mb):
                return "mouth"
        for ca, cb in axis_cuts:
            if on_segment(u, ca, cb) and on_segment(v, ca, cb):
                return "cut"
        return "boundary"

    kinds = [classify_edge(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]
    hole_items: list[tuple[list[Point], list[str]]] = [
        (list(h), ["boundary"] * len(h)) for h in holes
    ]
    radial_cuts: list[Segment] = []
    frame = Similarity.to_unit_frame(center, anchor)

    while hole_items:
        best = None
        for hi, (hole, _hk) in enumerate(hole_items):
            for v in hole:
                for outward in (True, False):
                    hit = _radial_hit(ring, [h for h, _ in hole_items], hi, center, v, outward)
                    if hit is None:
                        continue
                    hpt, target = hit
                    fv, fh = frame.apply(v), frame.apply(hpt)
                    key = ((fv.x, fv.y), (fh.x, fh.y))
                    if best is None or key < best[0]:
                        best = (key, hi, v, hpt, target)
        if best is None:
            raise ConstructionError("no radial cut found for a branch hole")
        _, hi, v, hpt, target = best
        radial_cuts.append((v, hpt))
        hole, hkinds = hole_items.pop(hi)
        if target == "ring":
            ring, kinds = _bridge(ring, kinds, hole, hkinds, v, hpt)
        else:
            if target > hi:
                target -= 1
            tnodes, tkinds = hole_items[target]
            hole_items[target] = _bridge(tnodes, tkinds, hole, hkinds, v, hpt)

    tris = _ear_clip(ring, kinds, sub_branch, new_side, side_kind)
    return tris, radial_cuts


def _radial_hit(ring, holes, hi, center, v, outward):
    """First boundary hit along the radial ray from v; None if invalid."""
    d = psub(v, center)
    if not outward:
        d = Point(-d.x, -d.y)
    best_t = None
    best = None
    n = len(ring)
    edges = [(ring[i], ring[(i + 1) % n], "ring", None) for i in range(n)]
    for hj, hole in enumerate(holes):
        mh = len(hole)
        for i in range(mh):
            edges.append((hole[i], hole[(i + 1) % mh], "hole", hj))
    for a, b, kind, owner in edges:
        e = psub(b, a)
        denom = cross(d, e)
        if sgn(denom) == 0:
            continue
        w = psub(a, v)
        t = cross(w, e) / denom
        s = cross(w, d) / denom
        if sgn(t) <= 0 or sgn(s) < 0 or sgn(s - 1) > 0:
            continue
        if kind == "hole" and owner == hi:
            continue
        if best_t is None or t < best_t:
            best_t = t
            best = (Point(v.x + t * d.x, v.y + t * d.y), kind, owner)
    if best is None:
        return None
    hpt, kind, owner = best
    mid = Point((v.x + hpt.x) / 2, (v.y + hpt.y) / 2)
    if not _point_in_ring(mid, ring):
        return None
    for hj, hole in enumerate(holes):
        if point_in_closed_ring(mid, hole):
            return None
    # the open segment must not graze any other boundary point
    seg_edges = edges
    for a, b, k2, o2 in seg_edges:
        ev = classify_segment_vs_edge(v, hpt, a, b)
        if ev is None:
            continue
        if ev.kind != "touch" or (ev.t0 != 0 and ev.t0 != 1):
            return None
    return hpt, ("ring" if kind == "ring" else owner)


def _bridge(host: list[Point], host_kinds: list[str], hole: list[Point],
            hole_kinds: list[str], v: Point, hpt: Point):
    """Splice `hole` into `host` along the bridge v<->hpt (hpt on host).

    Host may be the outer ring (CCW) or another hole ring (CW); in both
    cases the hole keeps its stored direction and the bridge edges become
    cuts, producing the standard doubled-bridge slit."""
    n = len(host)
    idx = None
    for i in range(n):
        a, b = host[i], host[(i + 1) % n]
        if hpt == a:
            idx = i
            break
        if hpt != b and on_segment(hpt, a, b):
            host = host[: i + 1] + [hpt] + host[i + 1:]
            host_kinds = host_kinds[: i + 1] + [host_kinds[i]] + host_kinds[i + 1:]
            idx = i + 1
            break
    if idx is None:
        raise ConstructionError("bridge landing point not on the host ring")
    hi = hole.index(v)
    hole_seq = hole[hi:] + hole[:hi]          # v, h1, ..., h_{m-1}
    hole_kseq = hole_kinds[hi:] + hole_kinds[:hi]  # edge v->h1, ..., h_{m-1}->v
    new_ring = host[: idx + 1] + hole_seq + [v] + host[idx:]
    new_kinds = (
        host_kinds[:idx]
        + ["cut"]
        + hole_kseq
        + ["cut"]
        + host_kinds[idx:]
    )
    assert len(new_ring) == len(new_kinds)
    return new_ring, new_kinds


def _ear_clip(ring: list[Point], kinds: list[str], sub_branch, new_side, side_kind):
    nodes = list(ring)
    side_ids = [new_side(k) for k in kinds]
    tris: list[Piece] = []
    guard = 0
    while len(nodes) > 3:
        guard += 1
        if guard > 10000:
            raise ConstructionError("ear clipping did not terminate")
        n = len(nodes)
        clipped = False
        for j in range(n):
            u, v, w = nodes[(j - 1) % n], nodes[j], nodes[(j + 1) % n]
            if orient(u, v, w) <= 0:
                continue
            if not _ear_ok(nodes, j):
                continue
            d = new_side("diag")
            tris.append(
                Piece((u, v, w), (side_ids[(j - 1) % n], side_ids[j], d), sub_branch)
            )
            # edge (j-1)->(j+1) becomes the recorded diagonal
            del nodes[j]
            del side_ids[j]
            side_ids[(j - 1) % len(side_ids)] = d
            clipped = True
            break
        if not clipped:
            raise ConstructionError("no valid ear found")
    u, v, w = nodes
    if orient(u, v, w) <= 0:
        raise ConstructionError("degenerate final triangle")
    tris.append(Piece((u, v, w), (side_ids[0], side_ids[1], side_ids[2]), sub_branch))
    return tris


def _ear_ok(nodes: list[Point], j: int) -> bool:
    n = len(nodes)
    u, v, w = nodes[(j - 1) % n], nodes[j], nodes[(j + 1) % n]
    tri = (u, v, w)
    corner_coords = {(u.x, u.y), (v.x, v.y), (w.x, w.y)}
    for k, q in enumerate(nodes):
        if k in ((j - 1) % n, j, (j + 1) % n):
            continue
        if (q.x, q.y) in corner_coords:
            continue
        if _in_closed_triangle(q, tri):
            return False
    for k in range(n):
        a, b = nodes[k], nodes[(k + 1) % n]
        if k in ((j - 1) % n, j):
            continue  # the two sides of the ear itself
        ev = classify_segment_vs_edge(u, w, a, b)
        if ev is None:
            continue
        if ev.kind != "touch":
            return False
        if not (ev.t0 == 0 or ev.t0 == 1):
            return False
    return True


def _in_closed_triangle(q: Point, tri) -> bool:
    a, b, c = tri
    return orient(a, b, q) >= 0 and orient(b, c, q) >= 0 and orient(c, a, q) >= 0


# -- j-tours ---------------------------------------------------------------------


def _region_walk(part: BranchPartition, j: int, pivot: Point) -> list[Point]:
    """Counterclockwise boundary walk of Q plus triangles of depth <= j,
    starting and ending at the pivot."""
    in_region = [p.depth <= j for p in part.pieces]
    diag_in: dict[int, int] = {}
    for idx, p in enumerate(part.pieces):
        if in_region[idx]:
            for sid in p.side_ids:
                if part.side_kind[sid] == "diag":
                    diag_in[sid] = diag_in.get(sid, 0) + 1
    mouth_in: set = set()
    edges: list[tuple[Point, Point]] = []
    for idx, p in enumerate(part.pieces):
        if not in_region[idx]:
            continue
        for x in range(3):
            sid = p.side_ids[x]
            seg = (p.points[x], p.points[(x + 1) % 3])
            kind = part.side_kind[sid]
            if kind == "diag" and diag_in.get(sid, 0) == 2:
                continue
            if kind == "mouth":
                mouth_in.add(_seg_key(*seg))
                continue
            edges.append(seg)
    qr = part.q_ring
    for i in range(len(qr)):
        u, v = qr[i], qr[(i + 1) % len(qr)]
        if j >= 1 and _seg_key(u, v) in _all_mouth_keys(part):
            continue
        edges.append((u, v))
    return _walk_directed(edges, pivot)


def _all_mouth_keys(part: BranchPartition) -> set:
    cached = getattr(part, "_mouth_keys", None)
    if cached is None:
        cached = set()
        for p in part.pieces:
            for x in range(3):
                if part.side_kind[p.side_ids[x]] == "mouth":
                    cached.add(_seg_key(p.points[x], p.points[(x + 1) % 3]))
        part._mouth_keys = cached
    return cached


def _walk_directed(edges: list[tuple[Point, Point]], start: Point) -> list[Point]:
    out_map: dict[Point, list[Point]] = {}
    for u, v in edges:
        out_map.setdefault(u, []).append(v)
    if start not in out_map:
        raise ConstructionError("tour start not on the region boundary")
    for u in out_map:
        out_map[u].sort(key=cmp_to_key(lambda a, b, u=u: _angle_cmp(psub(a, u), psub(b, u))))
    first = out_map[start][0]
    walk = [start]
    cur = (start, first)
    total = len(edges)
    steps = 0
    while True:
        steps += 1
        if steps > 4 * total + 8:
            raise ConstructionError("region walk did not close")
        u, v = cur
        walk.append(v)
        outs = out_map.get(v)
        if not outs:
            raise ConstructionError("region boundary is not closed")
        ref = psub(u, v)
        nxt = _most_clockwise(ref, outs, v)
        cur = (v, nxt)
        if cur == (start, first):
            break
    walk = walk[:-1]
    if steps != total:
        raise ConstructionError(
            f"region boundary is not a single closed walk ({steps} of {total} edges)"
        )
    return walk


def _most_clockwise(ref: Point, candidates: list[Point], origin: Point) -> Point:
    """Outgoing direction with the smallest strictly positive clockwise
    rotation from `ref` (a full turn counts as last)."""

    def rot_class(d: Point) -> int:
        cr = sgn(cross(ref, d))
        dt = sgn(dot(ref, d))
        if cr == 0:
            return 3 if dt > 0 else 1  # same direction -> full turn; opposite -> half
        return 0 if cr < 0 else 2

    def cmp(p: Point, q: Point) -> int:
        dp, dq = psub(p, origin), psub(q, origin)
        cp, cq = rot_class(dp), rot_class(dq)
        if cp != cq:
            return -1 if cp < cq else 1
        c = sgn(cross(dp, dq))
        if c < 0:
            return -1
        if c > 0:
            return 1
        return 0

    return min(candidates, key=cmp_to_key(cmp))


# -- stage schedule ----------------------------------------------------------------


@dataclass(frozen=True)
class StageSchedule:
    """Stage arithmetic of the improved patrol: ascending clockwise j-tours,
    a long run of counterclockwise full tours, then descending."""

    m: int
    t: int

    @property
    def length(self) -> int:
        return 2 * self.m + 2 * self.t * self.t

    @property
    def nominal_perimeter_count(self) -> int:
        return 2 * self.t * self.t

    def entry(self, stage: int) -> tuple[str, int]:
        L = self.length
        if L == 0:
            return ("CCW", 0)
        stage %= L
        if stage < self.m:
            return ("CW", stage)
        jj = L - stage
        return ("CCW", jj if jj < self.m else self.m)

    def entries(self) -> list[tuple[str, int]]:
        return [self.entry(s) for s in range(self.length)]

    def is_perimeter(self, stage: int) -> bool:
        if self.length == 0:
            return True
        stage %= self.length
        return stage >= self.m and self.entry(stage)[1] == self.m


def stage_schedule(part: BranchPartition) -> StageSchedule:
    return part.schedule()
