"""Symmetry detection and similarity-invariant selections.

The workhorse is a canonical boundary encoding: for every directed outer
edge (start vertex, orientation) the whole polygon is rewritten in the
similarity frame that maps that edge to the unit segment, holes sorted by
their encoded blocks.  Two presentations encode equally iff a similarity
self-map of the polygon carries one to the other, so the encoding at once
yields the rotation group (order sigma), the reflections and their axes,
vertex orbits, and a canonical total rank of vertices that is invariant
under translation, rotation, uniform scaling and reflection of the input.

Rotations are recovered as exact vertex permutations with their matrices
built from coordinate ratios, so no irrational cosine ever appears unless
already present in the coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from polymeet.geometry import (
    GeometryError,
    Point,
    PolygonWithHoles,
    Similarity,
    centroid,
    cross,
    dist_sq,
    dot,
    on_segment,
    orient,
    psub,
)
from polymeet.scalars import Scalar, scalar_key, sgn

F = Fraction


@dataclass(frozen=True)
class GroupElement:
    transform: Similarity
    perm: tuple[int, ...]          # image of each flat vertex id
    is_reflection: bool


@dataclass
class SymmetryProfile:
    sigma: int
    axes: list[tuple[Point, Point]]
    rotation_classes: list[list[int]]
    similarity_classes: list[list[int]]
    axis_classes: list[list[int]]
    group: list[GroupElement]
    canonical_rank: dict[int, int]
    canonical_frame: Similarity
    fingerprint: tuple
    canonical_handedness: int      # +1 / -1; +1 when axially symmetric
    center: Point

    @property
    def axially_symmetric(self) -> bool:
        return bool(self.axes)


@dataclass(frozen=True)
class PivotChoice:
    kind: str                      # "vertex" | "edge_midpoint"
    location: Point
    class_points: tuple[Point, ...]
    axis: Optional[tuple[Point, Point]] = None
    vertex_id: Optional[int] = None


def _presentation_frame(outer: Sequence[Point], i: int, flip: int) -> Similarity:
    n = len(outer)
    a = outer[i]
    b = outer[(i + 1) % n] if flip > 0 else outer[(i - 1) % n]
    fr = Similarity.to_unit_frame(a, b)
    if flip < 0:
        refl = Similarity(F(1), F(0), F(0), F(-1), F(0), F(0))
        fr = refl.compose(fr)
    return fr


def _encode_presentation(P: PolygonWithHoles, i: int, flip: int):
    """(encoding, ordered flat vertex ids, frame) for presentation (i, flip)."""
    outer = P.outer
    n = len(outer)
    fr = _presentation_frame(outer, i, flip)
    if flip > 0:
        order = [(i + k) % n for k in range(n)]
    else:
        order = [(i - k) % n for k in range(n)]
    outer_ids = list(order)
    outer_enc = tuple(
        (lambda q: (q.x, q.y))(fr.apply(outer[j])) for j in order
    )
    hole_blocks = []
    base = n
    for hi, hole in enumerate(P.holes):
        m = len(hole)
        ids = list(range(base, base + m))
        if flip > 0:
            seq = list(range(m))
        else:
            seq = [(-k) % m for k in range(m)]
        coords = [fr.apply(hole[j]) for j in seq]
        pairs = [(c.x, c.y) for c in coords]
        # canonical cyclic start
        best_r = 0
        for r in range(1, m):
            if pairs[r:] + pairs[:r] < pairs[best_r:] + pairs[:best_r]:
                best_r = r
        block = tuple(pairs[best_r:] + pairs[:best_r])
        block_ids = [ids[seq[(best_r + k) % m]] for k in range(m)]
        hole_blocks.append((block, block_ids))
        base += m
    hole_blocks.sort(key=lambda t: t[0])
    enc = (outer_enc, tuple(b for b, _ in hole_blocks))
    ordered_ids = outer_ids + [vid for _, bids in hole_blocks for vid in bids]
    return enc, ordered_ids, fr


def _enc_key(enc) -> tuple:
    outer_enc, holes = enc
    return (
        tuple((scalar_key(x), scalar_key(y)) for x, y in outer_enc),
        tuple(tuple((scalar_key(x), scalar_key(y)) for x, y in b) for b in holes),
    )


def symmetricity(P: PolygonWithHoles) -> SymmetryProfile:
    if "symmetry" in P._cache:
        return P._cache["symmetry"]
    outer = P.outer
    n = len(outer)
    pts = P.vertices()
    index = {p: k for k, p in enumerate(pts)}
    c = centroid(P)

    pres = {}
    for i in range(n):
        for flip in (1, -1):
            pres[(i, flip)] = _encode_presentation(P, i, flip)

    base_enc = pres[(0, 1)][0]
    group: list[GroupElement] = []
    for (i, flip), (enc, _ids, _fr) in pres.items():
        if enc != base_enc:
            continue
        a2 = outer[i]
        b2 = outer[(i + 1) % n] if flip > 0 else outer[(i - 1) % n]
        g = Similarity.mapping_segment(outer[0], outer[1], a2, b2, flip=(flip < 0))
        try:
            perm = tuple(index[g.apply(p)] for p in pts)
        except KeyError:
            raise GeometryError("encoding matched but transform is not a self-map")
        group.append(GroupElement(g, perm, flip < 0))

    rotations = [g for g in group if not g.is_reflection]
    reflections = [g for g in group if g.is_reflection]
    sigma = len(rotations)
    if reflections and len(reflections) != sigma:
        raise GeometryError("reflection count differs from rotation count")

    axes = []
    for g in reflections:
        t = g.transform
        d = Point(t.m00 + 1, t.m10)
        if sgn(d.x) == 0 and sgn(d.y) == 0:
            d = Point(t.m01, t.m11 + 1)
        axes.append((c, Point(c.x + d.x, c.y + d.y)))

    rotation_classes = _orbits(len(pts), [g.perm for g in rotations])
    similarity_classes = _orbits(len(pts), [g.perm for g in group])

    # canonical rank: minimal presentations, minimum address per vertex
    min_enc = min(e for e, _, _ in pres.values())
    ranks: dict[int, int] = {}
    canonical_frame = None
    canonical_key = None
    for key in sorted(pres.keys(), key=lambda k: (k[1] < 0, k[0])):
        enc, ids, fr = pres[key]
        if enc != min_enc:
            continue
        if canonical_frame is None:
            canonical_frame = fr
            canonical_key = key
        for addr, vid in enumerate(ids):
            if vid not in ranks or addr < ranks[vid]:
                ranks[vid] = addr

    min_plus = min(pres[(i, 1)][0] for i in range(n))
    min_minus = min(pres[(i, -1)][0] for i in range(n))
    handedness = 1 if min_plus <= min_minus else -1

    # order similarity classes by canonical rank
    similarity_classes.sort(key=lambda cls: min(ranks[v] for v in cls))
    rotation_classes.sort(key=lambda cls: min(ranks[v] for v in cls))

    axis_classes = _axis_orbits(axes, reflections, rotations, index, pts)
    axis_classes = _order_axis_classes(P, axes, axis_classes, c, ranks, pts, similarity_classes)

    profile = SymmetryProfile(
        sigma=sigma,
        axes=axes,
        rotation_classes=rotation_classes,
        similarity_classes=similarity_classes,
        axis_classes=axis_classes,
        group=group,
        canonical_rank=ranks,
        canonical_frame=canonical_frame,
        fingerprint=_enc_key(min_enc),
        canonical_handedness=handedness,
        center=c,
    )
    P._cache["symmetry"] = profile
    return profile


def _orbits(n: int, perms: list[tuple[int, ...]]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for v in range(n):
        if v in seen:
            continue
        orbit = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for perm in perms:
                w = perm[u]
                if w not in orbit:
                    orbit.add(w)
                    frontier.append(w)
        seen |= orbit
        out.append(sorted(orbit))
    return out


def _axis_orbits(axes, reflections, rotations, index, pts) -> list[list[int]]:
    if not axes:
        return []
    perm_to_axis = {}
    for ai, g in enumerate(reflections):
        perm_to_axis[g.perm] = ai
    k = len(axes)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for rot in rotations:
        inv = [0] * len(rot.perm)
        for src, dst in enumerate(rot.perm):
            inv[dst] = src
        for ai, refl in enumerate(reflections):
            conj = tuple(rot.perm[refl.perm[inv[v]]] for v in range(len(rot.perm)))
            aj = perm_to_axis.get(conj)
            if aj is not None:
                union(ai, aj)
    groups: dict[int, list[int]] = {}
    for ai in range(k):
        groups.setdefault(find(ai), []).append(ai)
    return list(groups.values())


def axis_boundary_points(P: PolygonWithHoles, axis: tuple[Point, Point]) -> list[Point]:
    """Exact boundary intersections with the axis line, deduplicated."""
    a0, a1 = axis
    pts: list[Point] = []
    for _, _, a, b in P.edges():
        sa = orient(a0, a1, a)
        sb = orient(a0, a1, b)
        if sa == 0:
            if a not in pts:
                pts.append(a)
        if sa * sb < 0:
            d = psub(a1, a0)
            e = psub(b, a)
            t = cross(psub(a, a0), e) / cross(d, e)
            p = Point(a0.x + t * d.x, a0.y + t * d.y)
            if p not in pts:
                pts.append(p)
    return pts


def _order_axis_classes(P, axes, axis_classes, c, ranks, pts, sim_classes) -> list[list[int]]:
    if not axis_classes:
        return []
    scale_sq = None
    if sim_classes:
        v0 = sim_classes[0][0]
        scale_sq = dist_sq(c, pts[v0])
    vset = {p: i for i, p in enumerate(pts)}

    def point_profile(p: Point):
        d = dist_sq(c, p) / scale_sq
        vid = vset.get(p)
        kind = 0 if vid is not None else 1
        rank = ranks[vid] if vid is not None else -1
        return (scalar_key(d), kind, rank)

    def class_key(cls: list[int]):
        profs = []
        for ai in cls:
            bp = axis_boundary_points(P, axes[ai])
            profs.append(tuple(sorted(point_profile(p) for p in bp)))
        return tuple(sorted(profs))

    keyed = [(class_key(cls), sorted(cls)) for cls in axis_classes]
    keyed.sort()
    for i in range(len(keyed) - 1):
        if keyed[i][0] == keyed[i + 1][0]:
            raise GeometryError("axis classes not canonically separable")
    return [cls for _, cls in keyed]


def canonical_vertex_classes(P: PolygonWithHoles) -> list[list[int]]:
    return symmetricity(P).similarity_classes


def select_pivot_general(P: PolygonWithHoles, profile: SymmetryProfile, seed: int = 0) -> PivotChoice:
    """Algorithm-1 pivot: canonical rotation class element, or a canonical
    boundary point of a canonically selected symmetry axis."""
    pts = P.vertices()
    if not profile.axes:
        cls = profile.rotation_classes[0]
        members = sorted(cls, key=lambda v: profile.canonical_rank[v])
        vid = members[seed % len(members)]
        return PivotChoice(
            kind="vertex",
            location=pts[vid],
            class_points=tuple(pts[v] for v in members),
            vertex_id=vid,
        )
    cls = profile.axis_classes[0]
    axis = profile.axes[cls[seed % len(cls)]]
    bpts = axis_boundary_points(P, axis)
    c = profile.center
    vset = {p: i for i, p in enumerate(pts)}
    scale_sq = dist_sq(c, pts[profile.similarity_classes[0][0]])

    def prof(p: Point):
        vid = vset.get(p)
        return (
            scalar_key(dist_sq(c, p) / scale_sq),
            0 if vid is not None else 1,
            profile.canonical_rank[vid] if vid is not None else -1,
        )

    if profile.sigma % 2 == 1:
        # all axis points distinguishable: fully canonical choice
        chosen = min(bpts, key=prof)
        candidates = (chosen,)
    else:
        half = next(g for g in profile.group
                    if not g.is_reflection and _is_half_turn(g, profile.sigma))
        pairs: dict[tuple, list[Point]] = {}
        for p in bpts:
            q = half.transform.apply(p)
            key = tuple(sorted(((scalar_key(r.x), scalar_key(r.y)) for r in (p, q))))
            pairs.setdefault(key, [])
            if p not in pairs[key]:
                pairs[key].append(p)
        best_pair = min(pairs.values(), key=lambda ps: min(prof(p) for p in ps))
        best_pair.sort(key=lambda p: (scalar_key(p.x), scalar_key(p.y)))
        candidates = tuple(best_pair)
        chosen = candidates[(seed // max(1, len(cls))) % len(candidates)]
    vid = vset.get(chosen)
    return PivotChoice(
        kind="vertex" if vid is not None else "edge_midpoint",
        location=chosen,
        class_points=candidates,
        axis=axis,
        vertex_id=vid,
    )


def _is_half_turn(g: GroupElement, sigma: int) -> bool:
    t = g.transform
    return t.m00 == -1 and t.m11 == -1 and sgn(t.m01) == 0 and sgn(t.m10) == 0


def select_pivot_vertex_improved(
    P: PolygonWithHoles, profile: SymmetryProfile
) -> tuple[list[int], list[Point]]:
    """Improved-algorithm central class: canonical similarity class of
    vertices closest to the center; returns (vertex ids, seed-ordered points)."""
    pts = P.vertices()
    c = profile.center
    best = None
    for cls in profile.similarity_classes:
        d = dist_sq(c, pts[cls[0]])
        key = scalar_key(d)
        if best is None or sgn(d - best[0]) < 0:
            best = (d, cls)
    cls = best[1]
    if profile.sigma > 0 and len(cls) not in (profile.sigma, 2 * profile.sigma):
        raise GeometryError("central class size is not sigma or 2*sigma")
    members = sorted(cls, key=lambda v: profile.canonical_rank[v])
    return members, [pts[v] for v in members]
