"""The Compute procedures of the two meeting algorithms.

A searcher's persistent memory lives in its *memory frame*: the local
coordinate axes anchored at its initial origin, with ``cur_pos`` tracking
its believed position.  Snapshots arrive in the current local frame
(searcher at the origin) and are shifted by ``cur_pos`` on merge.

Transitions are pure: identical (state, snapshot) pairs produce identical
outputs, bit for bit.  Inconsistency is a value, not an error; a reset
rebuilds the state from the offending snapshot alone, exactly like the
pseudocode's SnapshotList := Snapshot, and the EXPLORE rule runs again in
the same cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional, Sequence

from polymeet import canon
from polymeet.geometry import (
    GeometryError,
    Point,
    PolygonWithHoles,
    UnreachableError,
    VisibilityRegion,
    _angle_cmp,
    _point_in_ring,
    _ring_area2,
    classify_segment_vs_edge,
    dijkstra_path,
    dist_sq,
    dot,
    on_segment,
    orient,
    padd,
    psub,
    sgn,
)
from polymeet.scalars import scalar_from_json, scalar_to_json

F = Fraction
ORIGIN = Point(F(0), F(0))

SnapPiece = tuple[Point, Point, bool, bool]


@dataclass(frozen=True)
class Snapshot:
    """Visible-boundary pieces in the searcher's current local frame, plus
    the other-searcher flag.  Pieces are canonically ordered."""

    pieces: tuple[SnapPiece, ...]
    sees_other: bool


def _piece_cmp(p1: SnapPiece, p2: SnapPiece) -> int:
    for a, b in ((p1[0], p2[0]), (p1[1], p2[1])):
        if a != b:
            c = _angle_cmp(a, b)
            if c:
                return c
            d = sgn(dist_sq(ORIGIN, a) - dist_sq(ORIGIN, b))
            if d:
                return d
    return 0


def canonicalize_pieces(pieces: Sequence[SnapPiece]) -> tuple[SnapPiece, ...]:
    """Deterministic local-frame normal form: endpoints of each piece in
    angular (then radial) order around the origin, pieces sorted likewise."""
    norm = []
    for a, b, fa, fb in pieces:
        if a == b:
            continue
        c = _angle_cmp(a, b)
        swap = c > 0 or (c == 0 and sgn(dist_sq(ORIGIN, a) - dist_sq(ORIGIN, b)) > 0)
        if swap:
            a, b, fa, fb = b, a, fb, fa
        norm.append((a, b, fa, fb))
    norm.sort(key=cmp_to_key(_piece_cmp))
    return tuple(norm)


def snapshot_from_region(region: VisibilityRegion, sees_other: bool) -> Snapshot:
    """Local-frame snapshot for a searcher located at the region viewpoint."""
    p = region.viewpoint
    pieces = [
        (psub(pc.a, p), psub(pc.b, p), pc.a_full_vertex, pc.b_full_vertex)
        for pc in region.pieces
    ]
    return Snapshot(canonicalize_pieces(pieces), sees_other)


def expected_snapshot_pieces(P: PolygonWithHoles, pos: Point) -> tuple[SnapPiece, ...]:
    cache = P._cache.setdefault("expected_snaps", {})
    if pos not in cache:
        cache[pos] = snapshot_from_region(canon.region(P, pos), False).pieces
    return cache[pos]


# -- merged map -------------------------------------------------------------------


@dataclass(frozen=True)
class MapVertex:
    visited: bool
    discovery_idx: int
    nbrs: tuple[Point, ...] = ()
    seen: tuple[Point, ...] = ()


@dataclass(frozen=True)
class MapData:
    vertices: dict        # Point -> MapVertex (never mutated once stored)
    discovery: tuple[Point, ...]
    fragments: tuple[tuple[Point, Point], ...]
    extra_edges: tuple[tuple[Point, Point], ...]
    complete: bool = False

    @classmethod
    def empty(cls) -> "MapData":
        return cls({}, (), (), ())


def _fragment_conflicts(fragments, a, b) -> bool:
    for c, d in fragments:
        ev = classify_segment_vs_edge(a, b, c, d)
        if ev is not None and ev.kind == "proper":
            return True
    return False


def _merge_fragment(fragments: list, a: Point, b: Point) -> None:
    for i, (c, d) in enumerate(fragments):
        if orient(c, d, a) == 0 and orient(c, d, b) == 0:
            e = psub(d, c)
            ee = dot(e, e)
            ta = dot(psub(a, c), e) / ee
            tb = dot(psub(b, c), e) / ee
            lo, hi = (ta, tb) if ta <= tb else (tb, ta)
            if hi < 0 or lo > 1:
                continue
            nlo = min(lo, F(0))
            nhi = max(hi, F(1))
            fragments[i] = (
                Point(c.x + nlo * e.x, c.y + nlo * e.y),
                Point(c.x + nhi * e.x, c.y + nhi * e.y),
            )
            return
    fragments.append((a, b))


def merge_snapshot(m: MapData, pieces: Sequence[SnapPiece], at: Point,
                   prev: Optional[Point] = None) -> tuple[MapData, bool]:
    """Merge a memory-frame snapshot taken at `at`; returns (map, conflict)."""
    vertices = dict(m.vertices)
    discovery = list(m.discovery)
    fragments = list(m.fragments)
    extra = list(m.extra_edges)
    conflict = False

    flagged: list[Point] = []
    for a, b, fa, fb in pieces:
        for pt, fl in ((a, fa), (b, fb)):
            if fl:
                if pt not in vertices:
                    vertices[pt] = MapVertex(False, len(discovery))
                    discovery.append(pt)
                if pt not in flagged:
                    flagged.append(pt)
    for a, b, _, _ in pieces:
        if _fragment_conflicts(fragments, a, b):
            conflict = True
        for v in vertices:
            if v != a and v != b and on_segment(v, a, b, closed=False):
                conflict = True
    for v in flagged:
        for c, d in fragments:
            if v != c and v != d and on_segment(v, c, d, closed=False):
                conflict = True
    for a, b, _, _ in pieces:
        _merge_fragment(fragments, a, b)

    if at in vertices:
        mv = vertices[at]
        if not mv.visited:
            nbrs = []
            for a, b, fa, fb in pieces:
                if a == at and fb and b != at and b not in nbrs:
                    nbrs.append(b)
                elif b == at and fa and a != at and a not in nbrs:
                    nbrs.append(a)
            if len(nbrs) != 2:
                conflict = True
            vertices[at] = MapVertex(True, mv.discovery_idx, tuple(nbrs), tuple(flagged))
    if prev is not None and prev != at:
        extra.append((prev, at))
    for v in flagged:
        if v != at:
            extra.append((at, v))

    return (
        MapData(vertices, tuple(discovery), tuple(fragments), tuple(extra)),
        conflict,
    )


def polygon_from_map(m: MapData) -> PolygonWithHoles:
    """Stitch rings from the boundary-neighbor links of a fully visited map."""
    if not m.vertices or any(not mv.visited for mv in m.vertices.values()):
        raise GeometryError("map incomplete")
    rings: list[list[Point]] = []
    order = sorted(m.vertices, key=lambda p: m.vertices[p].discovery_idx)
    taken: set[Point] = set()
    for start in order:
        if start in taken:
            continue
        ring = [start]
        taken.add(start)
        prev: Optional[Point] = None
        cur = start
        while True:
            nbrs = m.vertices[cur].nbrs
            if len(nbrs) != 2:
                raise GeometryError("vertex without two boundary neighbors")
            nxt = nbrs[0] if nbrs[0] != prev else nbrs[1]
            if nxt == start:
                break
            if nxt in taken or len(ring) > len(m.vertices):
                raise GeometryError("boundary links do not close")
            ring.append(nxt)
            taken.add(nxt)
            prev, cur = cur, nxt
        if len(ring) < 3:
            raise GeometryError("degenerate ring")
        rings.append(ring)
    outer_idx = None
    for i, ring in enumerate(rings):
        if all(i == j or _point_in_ring(rings[j][0], ring) for j in range(len(rings))):
            outer_idx = i
            break
    if outer_idx is None:
        raise GeometryError("no ring contains all others")
    outer = rings.pop(outer_idx)
    if sgn(_ring_area2(outer)) < 0:
        outer = [outer[0]] + list(reversed(outer[1:]))
    holes = []
    for ring in rings:
        if sgn(_ring_area2(ring)) > 0:
            ring = [ring[0]] + list(reversed(ring[1:]))
        holes.append(ring)
    return PolygonWithHoles(outer, holes, validate=False)


# -- searcher state ------------------------------------------------------------------


@dataclass(frozen=True)
class SearcherState:
    algorithm: int
    pivot_seed: int
    cur_pos: Point = ORIGIN
    map: MapData = field(default_factory=MapData.empty)
    action: str = "EXPLORE"
    direction: int = 1                 # +1 clockwise, -1 counterclockwise (algorithm 1)
    stage: int = -1                    # algorithm 2
    tour_index: int = 0
    polygon: Optional[PolygonWithHoles] = None
    resets: int = 0


@dataclass(frozen=True)
class ComputeOutput:
    destination: Point                 # current local frame (origin = searcher)
    state: SearcherState
    reset_occurred: bool = False


def fresh_state(algorithm: int, pivot_seed: int = 0) -> SearcherState:
    return SearcherState(algorithm=algorithm, pivot_seed=pivot_seed)


def explore_next_target(state: SearcherState) -> Optional[Point]:
    """First discovered-but-unvisited vertex, or None when exploration is done."""
    for p in state.map.discovery:
        if not state.map.vertices[p].visited:
            return p
    return None


def _mem_pieces(snap: Snapshot, at: Point) -> tuple[SnapPiece, ...]:
    return tuple((padd(a, at), padd(b, at), fa, fb) for a, b, fa, fb in snap.pieces)


def _patrol_structurally_consistent(state: SearcherState) -> bool:
    P = state.polygon
    if P is None:
        return False
    try:
        if state.algorithm == 1:
            plan = canon.alg1_plan(P, state.pivot_seed)
            tour = plan.tours["CW" if state.direction > 0 else "CCW"]
            return 0 <= state.tour_index < len(tour) and tour[state.tour_index] == state.cur_pos
        plan = canon.alg2_plan(P, state.pivot_seed)
        if plan.rotational:
            if plan.schedule.length and not (-1 <= state.stage < plan.schedule.length):
                return False
            if state.stage == -1:
                return state.cur_pos in P.vertex_set()
            d, j = plan.schedule.entry(state.stage)
            tour = plan.j_tour(j, d)
            return 0 <= state.tour_index < len(tour) and tour[state.tour_index] == state.cur_pos
        tour = plan.alg1.tours["CW" if state.stage % 2 == 1 else "CCW"]
        return 0 <= state.tour_index < len(tour) and tour[state.tour_index] == state.cur_pos
    except (GeometryError, ValueError):
        return False


def check_consistency(state: SearcherState, snap: Snapshot) -> str:
    """'consistent' or 'inconsistent'; never raises, never mutates."""
    if state.action == "PATROL" or state.map.complete:
        if state.polygon is None:
            return "inconsistent"
        try:
            if not state.polygon.contains(state.cur_pos):
                return "inconsistent"
            expected = expected_snapshot_pieces(state.polygon, state.cur_pos)
        except GeometryError:
            return "inconsistent"
        if expected != snap.pieces:
            return "inconsistent"
        if state.action == "PATROL" and not _patrol_structurally_consistent(state):
            return "inconsistent"
        return "consistent"
    _, conflict = merge_snapshot(state.map, _mem_pieces(snap, state.cur_pos), state.cur_pos)
    return "inconsistent" if conflict else "consistent"


def _reset_state(state: SearcherState, snap: Snapshot) -> SearcherState:
    m, _ = merge_snapshot(MapData.empty(), _mem_pieces(snap, state.cur_pos), state.cur_pos)
    return SearcherState(
        algorithm=state.algorithm,
        pivot_seed=state.pivot_seed,
        cur_pos=state.cur_pos,
        map=m,
        action="EXPLORE",
        resets=state.resets + 1,
    )


def _explore_dest(state: SearcherState):
    """(destination | None, reachable_flag); None means exploration is done."""
    target = explore_next_target(state)
    if target is None:
        return None, True
    m = state.map
    nodes = [state.cur_pos]
    index = {state.cur_pos: 0}
    adj: dict[int, set[int]] = {0: set()}

    def nid(p: Point) -> int:
        if p not in index:
            index[p] = len(nodes)
            nodes.append(p)
            adj[index[p]] = set()
        return index[p]

    for p, mv in m.vertices.items():
        pi = nid(p)
        if mv.visited:
            for w in mv.seen:
                wi = nid(w)
                adj[pi].add(wi)
                adj[wi].add(pi)
    for a, b in m.extra_edges:
        ai, bi = nid(a), nid(b)
        adj[ai].add(bi)
        adj[bi].add(ai)
    try:
        path = dijkstra_path(nodes, adj, 0, nid(target))
    except UnreachableError:
        return None, False
    dest = nodes[path[1]] if len(path) > 1 else state.cur_pos
    return dest, True


def _enter_patrol(state: SearcherState) -> SearcherState:
    poly = polygon_from_map(state.map)
    new_map = replace(state.map, complete=True, fragments=(), extra_edges=())
    st = replace(state, map=new_map, polygon=poly, action="PATROL",
                 direction=1, stage=-1, tour_index=0)
    if state.algorithm == 1:
        plan = canon.alg1_plan(poly, state.pivot_seed)
        st = replace(st, tour_index=plan.tours["CW"].index(st.cur_pos))
    else:
        plan = canon.alg2_plan(poly, state.pivot_seed)
        if not plan.rotational:
            st = replace(st, tour_index=plan.alg1.tours["CW"].index(st.cur_pos))
    return st


def _patrol_step_alg1(state: SearcherState) -> tuple[Point, SearcherState]:
    plan = canon.alg1_plan(state.polygon, state.pivot_seed)
    direction = state.direction
    if state.tour_index == 0 and state.cur_pos == plan.pivot.location:
        direction = -direction
    tour = plan.tours["CW" if direction > 0 else "CCW"]
    nxt = (state.tour_index + 1) % len(tour)
    dest = tour[nxt]
    return dest, replace(state, direction=direction, tour_index=nxt, cur_pos=dest)


def _patrol_step_alg2(state: SearcherState):
    """(dest, state, inconsistent_flag)."""
    plan = canon.alg2_plan(state.polygon, state.pivot_seed)
    if not plan.rotational:
        stage = state.stage
        if state.tour_index == 0 and state.cur_pos == plan.pivot:
            stage = stage + 1
        tour = plan.alg1.tours["CW" if stage % 2 == 1 else "CCW"]
        nxt = (state.tour_index + 1) % len(tour)
        dest = tour[nxt]
        return dest, replace(state, stage=stage, tour_index=nxt, cur_pos=dest), False
    sch = plan.schedule
    stage = state.stage
    if state.cur_pos == plan.pivot and state.tour_index == 0:
        stage = stage + 1
        if sch.length == 0 or stage >= sch.length:
            stage = 0
    if stage == -1:
        g = canon.vis_graph(state.polygon)
        if state.cur_pos not in g.index or plan.pivot not in g.index:
            return state.cur_pos, state, True
        path = dijkstra_path(g.points, g.adj, g.index[state.cur_pos], g.index[plan.pivot])
        dest = g.points[path[1]] if len(path) > 1 else state.cur_pos
        return dest, replace(state, stage=-1, tour_index=0, cur_pos=dest), False
    d, j = sch.entry(stage)
    tour = plan.j_tour(j, d)
    idx = state.tour_index if stage == state.stage else 0
    if not (0 <= idx < len(tour)) or tour[idx] != state.cur_pos:
        return state.cur_pos, state, True
    nxt = (idx + 1) % len(tour)
    dest = tour[nxt]
    return dest, replace(state, stage=stage, tour_index=nxt, cur_pos=dest), False


def _patrol_step(state: SearcherState):
    if state.algorithm == 1:
        dest, st = _patrol_step_alg1(state)
        return dest, st, False
    return _patrol_step_alg2(state)


def _dest_in_sight(snap: Snapshot, pos0: Point, dest: Point) -> bool:
    """Both algorithms only ever move to visible boundary points, so a
    legitimate destination lies on some snapshot piece."""
    if dest == pos0:
        return True
    d = psub(dest, pos0)
    return any(on_segment(d, a, b) for a, b, _, _ in snap.pieces)


def compute(state: SearcherState, snap: Snapshot) -> ComputeOutput:
    """One Compute phase of either algorithm (selected by state.algorithm)."""
    if snap.sees_other:
        return ComputeOutput(ORIGIN, state, False)

    pos0 = state.cur_pos
    reset = False
    if check_consistency(state, snap) == "inconsistent":
        state = _reset_state(state, snap)
        reset = True
    elif state.action == "EXPLORE":
        new_map, _ = merge_snapshot(state.map, _mem_pieces(snap, pos0), pos0)
        state = replace(state, map=new_map)

    for _attempt in (0, 1):
        st2 = state
        dest = None
        if st2.action == "EXPLORE":
            dest, ok = _explore_dest(st2)
            if not ok:
                if _attempt or reset:
                    raise GeometryError("fresh exploration is unreachable")
                state = _reset_state(state, snap)
                reset = True
                continue
            if dest is not None:
                st2 = replace(st2, cur_pos=dest)
            else:
                try:
                    st2 = _enter_patrol(st2)
                except (GeometryError, ValueError):
                    if _attempt or reset:
                        raise
                    state = _reset_state(state, snap)
                    reset = True
                    continue
        if dest is None:
            dest, st2, bad = _patrol_step(st2)
            if bad:
                if _attempt or reset:
                    raise GeometryError("patrol state inconsistent after reset")
                state = _reset_state(state, snap)
                reset = True
                continue
        if not _dest_in_sight(snap, pos0, dest):
            if _attempt or reset:
                raise GeometryError("destination invisible after reset")
            state = _reset_state(state, snap)
            reset = True
            continue
        return ComputeOutput(psub(dest, pos0), st2, reset)
    raise AssertionError("unreachable")


def compute_alg1(state: SearcherState, snap: Snapshot) -> ComputeOutput:
    assert state.algorithm == 1
    return compute(state, snap)


def compute_alg2(state: SearcherState, snap: Snapshot) -> ComputeOutput:
    assert state.algorithm == 2
    return compute(state, snap)


# -- serialization ---------------------------------------------------------------


def state_to_json(state: SearcherState) -> dict:
    def pt(p: Point):
        return [scalar_to_json(p.x), scalar_to_json(p.y)]

    out = {
        "algorithm": state.algorithm,
        "pivot_seed": state.pivot_seed,
        "action": state.action,
        "direction": state.direction,
        "stage": state.stage,
        "tour_index": state.tour_index,
        "cur_pos": pt(state.cur_pos),
        "resets": state.resets,
    }
    if state.polygon is not None:
        out["polygon"] = state.polygon.to_json_obj()
    return out


def state_from_json(obj: dict) -> SearcherState:
    def pt(v):
        return Point(scalar_from_json(v[0]), scalar_from_json(v[1]))

    poly = None
    m = MapData.empty()
    if "polygon" in obj:
        poly = PolygonWithHoles.from_json_obj(obj["polygon"])
        m = map_from_polygon(poly)
    return SearcherState(
        algorithm=int(obj["algorithm"]),
        pivot_seed=int(obj.get("pivot_seed", 0)),
        cur_pos=pt(obj["cur_pos"]),
        map=m,
        action=obj.get("action", "EXPLORE"),
        direction=int(obj.get("direction", 1)),
        stage=int(obj.get("stage", -1)),
        tour_index=int(obj.get("tour_index", 0)),
        polygon=poly,
        resets=int(obj.get("resets", 0)),
    )


def map_from_polygon(P: PolygonWithHoles) -> MapData:
    """Complete map equivalent to having explored P entirely."""
    vertices = {}
    discovery: list[Point] = []
    for ring in P.rings:
        n = len(ring)
        for i, p in enumerate(ring):
            vertices[p] = MapVertex(
                True, len(discovery), (ring[(i - 1) % n], ring[(i + 1) % n]), ()
            )
            discovery.append(p)
    return MapData(vertices, tuple(discovery), (), (), complete=True)
