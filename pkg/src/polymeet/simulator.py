"""Event-driven asynchronous world.

Searchers run Look-Compute-Move cycles whose phase boundaries are chosen
by an adversarial scheduler as a stream of directives.  Time is rational
and advances by a scheduler-chosen amount per directive; trajectories are
piecewise linear; visibility is evaluated only at Look instants, which is
where mutual awareness is decided.

Each Move must finish within a bounded number of Advance directives (the
fairness proxy for "unpredictably long but finite").
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from polymeet import canon
from polymeet.geometry import (
    GeometryError,
    Point,
    PolygonWithHoles,
    cross,
    dot,
    psub,
    padd,
    pmul,
    sgn,
    visible,
)
from polymeet.scalars import Scalar, scalar_float, scalar_from_json, scalar_to_json
from polymeet.searcher import (
    ComputeOutput,
    SearcherState,
    Snapshot,
    canonicalize_pieces,
    compute,
    fresh_state,
    snapshot_from_region,
    state_from_json,
    state_to_json,
)
from polymeet.symmetry import symmetricity

F = Fraction


class DirectiveError(ValueError):
    """Illegal directive: rejected with a reason, world unchanged."""


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalFrame:
    ex: Point
    ey: Point

    def __post_init__(self):
        if sgn(dot(self.ex, self.ey)) != 0:
            raise ValueError("frame axes must be orthogonal")
        if dot(self.ex, self.ex) != dot(self.ey, self.ey):
            raise ValueError("frame axes must have equal length")
        if sgn(cross(self.ex, self.ey)) == 0:
            raise ValueError("degenerate frame")

    @classmethod
    def identity(cls) -> "LocalFrame":
        return cls(Point(F(1), F(0)), Point(F(0), F(1)))

    @property
    def handedness(self) -> int:
        return sgn(cross(self.ex, self.ey))

    def to_world_vec(self, v: Point) -> Point:
        return Point(v.x * self.ex.x + v.y * self.ey.x, v.x * self.ex.y + v.y * self.ey.y)

    def to_local_vec(self, w: Point) -> Point:
        det = cross(self.ex, self.ey)
        return Point(cross(w, self.ey) / det, cross(self.ex, w) / det)

    def to_json(self):
        return {
            "ex": [scalar_to_json(self.ex.x), scalar_to_json(self.ex.y)],
            "ey": [scalar_to_json(self.ey.x), scalar_to_json(self.ey.y)],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            Point(scalar_from_json(obj["ex"][0]), scalar_from_json(obj["ex"][1])),
            Point(scalar_from_json(obj["ey"][0]), scalar_from_json(obj["ey"][1])),
        )


@dataclass(frozen=True)
class Directive:
    searcher: int
    action: str                        # Look | FinishCompute | StartMove | AdvanceMove
    fraction: Optional[Fraction] = None
    dt: Fraction = F(1)

    def to_json(self):
        out = {"searcher": self.searcher, "action": self.action, "dt": scalar_to_json(self.dt)}
        if self.fraction is not None:
            out["fraction"] = scalar_to_json(self.fraction)
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(
            int(obj["searcher"]),
            obj["action"],
            Fraction(obj["fraction"]) if "fraction" in obj else None,
            Fraction(obj.get("dt", 1)),
        )


@dataclass
class SimSearcher:
    sid: int
    frame: LocalFrame
    pos: Point
    algorithm: int
    state: SearcherState
    phase: str = "Idle"                # Idle | Computing | MoveReady | Moving
    pending: Optional[Snapshot] = None
    move_start: Optional[Point] = None
    dest: Optional[Point] = None
    advance_count: int = 0
    last_look_t: Optional[Fraction] = None
    prev_look_t: Optional[Fraction] = None
    last_saw: frozenset = frozenset()

    def copy(self) -> "SimSearcher":
        return SimSearcher(
            self.sid, self.frame, self.pos, self.algorithm, self.state, self.phase,
            self.pending, self.move_start, self.dest, self.advance_count,
            self.last_look_t, self.prev_look_t, self.last_saw,
        )


class World:
    def __init__(self, polygon: PolygonWithHoles, searchers: list[SimSearcher],
                 move_cap: int = 8):
        self.polygon = polygon
        self.searchers = searchers
        self.clock: Fraction = F(0)
        self.outcome: Optional[tuple] = None   # ("met", (i, j), t)
        self.move_cap = move_cap
        self.directive_count = 0

    def copy(self) -> "World":
        w = World(self.polygon, [s.copy() for s in self.searchers], self.move_cap)
        w.clock = self.clock
        w.outcome = self.outcome
        w.directive_count = self.directive_count
        return w

    # -- queries ------------------------------------------------------------

    def legal_directives(self) -> list[Directive]:
        if self.outcome is not None:
            return []
        out = []
        for s in self.searchers:
            if s.phase == "Idle":
                out.append(Directive(s.sid, "Look"))
            elif s.phase == "Computing":
                out.append(Directive(s.sid, "FinishCompute"))
            elif s.phase == "MoveReady":
                out.append(Directive(s.sid, "StartMove"))
            elif s.phase == "Moving":
                out.append(Directive(s.sid, "AdvanceMove", F(1)))
                if s.advance_count < self.move_cap - 1:
                    out.append(Directive(s.sid, "AdvanceMove", F(1, 2)))
        return out

    def is_legal(self, d: Directive) -> Optional[str]:
        if self.outcome is not None:
            return "run is over"
        if not (0 <= d.searcher < len(self.searchers)):
            return "unknown searcher"
        s = self.searchers[d.searcher]
        need = {"Look": "Idle", "FinishCompute": "Computing",
                "StartMove": "MoveReady", "AdvanceMove": "Moving"}.get(d.action)
        if need is None:
            return f"unknown action {d.action!r}"
        if s.phase != need:
            return f"{d.action} illegal in phase {s.phase}"
        if d.action == "AdvanceMove":
            if d.fraction is None or not (0 < d.fraction <= 1):
                return "fraction must be in (0, 1]"
            if s.advance_count >= self.move_cap - 1 and d.fraction != 1:
                return "move must complete: advance cap reached"
        if d.dt < 0:
            return "time cannot flow backwards"
        return None

    def _pair_visible(self, p: Point, q: Point) -> bool:
        cache = self.polygon._cache.setdefault("pairvis", {})
        key = (p, q) if (p.x, p.y) <= (q.x, q.y) else (q, p)
        if key not in cache:
            cache[key] = visible(self.polygon, p, q)
        return cache[key]

    def _local_pieces(self, s: SimSearcher):
        cache = self.polygon._cache.setdefault("localsnaps", {})
        key = (s.sid, s.pos)
        if key not in cache:
            region = canon.region(self.polygon, s.pos)
            inv_pieces = []
            for pc in region.pieces:
                inv_pieces.append(
                    (
                        s.frame.to_local_vec(psub(pc.a, s.pos)),
                        s.frame.to_local_vec(psub(pc.b, s.pos)),
                        pc.a_full_vertex,
                        pc.b_full_vertex,
                    )
                )
            cache[key] = canonicalize_pieces(inv_pieces)
        return cache[key]

    # -- stepping -----------------------------------------------------------

    def step(self, d: Directive) -> list[dict]:
        reason = self.is_legal(d)
        if reason is not None:
            raise DirectiveError(reason)
        self.clock = self.clock + d.dt
        self.directive_count += 1
        s = self.searchers[d.searcher]
        events: list[dict] = []
        if d.action == "Look":
            sees = [
                o.sid for o in self.searchers
                if o.sid != s.sid and self._pair_visible(s.pos, o.pos)
            ]
            pieces = self._local_pieces(s)
            s.pending = Snapshot(pieces, bool(sees))
            old_last = s.last_look_t
            events.append({"kind": "look", "saw": sees})
            for j in sorted(sees):
                o = self.searchers[j]
                if (
                    o.last_look_t is not None
                    and s.sid in o.last_saw
                    and (old_last is None or old_last <= o.last_look_t)
                ):
                    self.outcome = ("met", (min(s.sid, j), max(s.sid, j)), self.clock)
                    events.append({"kind": "met", "pair": list(self.outcome[1])})
                    break
            s.prev_look_t = old_last
            s.last_look_t = self.clock
            s.last_saw = frozenset(sees)
            s.phase = "Computing"
        elif d.action == "FinishCompute":
            out: ComputeOutput = compute(s.state, s.pending)
            dest_world = padd(s.pos, s.frame.to_world_vec(out.destination))
            s.state = out.state
            s.pending = None
            if out.reset_occurred:
                events.append({"kind": "reset"})
            events.append(
                {
                    "kind": "compute",
                    "action": s.state.action,
                    "stage": s.state.stage,
                    "direction": s.state.direction,
                }
            )
            if dest_world == s.pos:
                s.phase = "Idle"
            else:
                if not self.polygon.contains(dest_world) or not self._pair_visible(s.pos, dest_world):
                    raise SimulationError(
                        f"searcher {s.sid} computed an invalid destination {dest_world}"
                    )
                s.dest = dest_world
                s.move_start = s.pos
                s.advance_count = 0
                s.phase = "MoveReady"
        elif d.action == "StartMove":
            s.phase = "Moving"
        elif d.action == "AdvanceMove":
            f = d.fraction
            s.advance_count += 1
            if f == 1:
                s.pos = s.dest
                s.dest = None
                s.move_start = None
                s.advance_count = 0
                s.phase = "Idle"
                events.append({"kind": "arrived"})
            else:
                delta = psub(s.dest, s.pos)
                s.pos = padd(s.pos, pmul(delta, f))
        return events


# -- world construction --------------------------------------------------------


def inward_point(P: PolygonWithHoles, edge_index: int) -> Point:
    """A point strictly inside P just off the midpoint of an outer edge."""
    n = len(P.outer)
    a = P.outer[edge_index % n]
    b = P.outer[(edge_index + 1) % n]
    mid = Point((a.x + b.x) / 2, (a.y + b.y) / 2)
    raw = Point(-(b.y - a.y), b.x - a.x)  # interior is left of a->b
    nn = dot(raw, raw)
    nrm = Point(raw.x / nn, raw.y / nn)   # magnitude 1/|edge|
    for k in range(1, 60):
        cand = Point(mid.x + nrm.x / (1 << k), mid.y + nrm.y / (1 << k))
        if P.strictly_inside(cand):
            return cand
    raise GeometryError("no inward point found")


def symmetric_frames(P: PolygonWithHoles, k: int) -> tuple[list[Point], list[LocalFrame]]:
    """k searchers in rotationally symmetric positions with rotated frames."""
    prof = symmetricity(P)
    if prof.sigma < k:
        raise ValueError(f"polygon symmetricity {prof.sigma} < {k}")
    rots = [g for g in prof.group if not g.is_reflection]

    def angle_key(g):
        c, sn = g.transform.m00, g.transform.m10
        from polymeet.geometry import _angle_cmp
        from functools import cmp_to_key
        return (c, sn)

    # sort rotations by exact angle: identity first, then increasing angle
    from functools import cmp_to_key
    from polymeet.geometry import _angle_cmp

    rots.sort(key=cmp_to_key(
        lambda g1, g2: _angle_cmp(Point(g1.transform.m00, g1.transform.m10),
                                  Point(g2.transform.m00, g2.transform.m10))))
    gen = rots[1] if len(rots) > 1 else rots[0]
    p0 = inward_point(P, 0)
    ex0, ey0 = Point(F(1), F(0)), Point(F(0), F(1))
    positions = []
    frames = []
    p, ex, ey = p0, ex0, ey0
    for _ in range(k):
        positions.append(p)
        frames.append(LocalFrame(ex, ey))
        p = gen.transform.apply(p)
        ex = gen.transform.apply_vec(ex)
        ey = gen.transform.apply_vec(ey)
    return positions, frames


def rational_rotation(k: int) -> tuple[Point, Point]:
    """Exact rational unit vectors from a Pythagorean parametrization."""
    m, n = 2 + (k % 5), 1 + (k % 3)
    if m == n:
        m += 1
    c = F(m * m - n * n, m * m + n * n)
    s = F(2 * m * n, m * m + n * n)
    return Point(c, s), Point(-s, c)


def build_world(
    polygon: PolygonWithHoles,
    algorithm: int,
    k: int,
    policy_seed: int = 0,
    frames: str | list[LocalFrame] = "identity",
    positions: Optional[list[Point]] = None,
    pivot_seeds: Optional[list[int]] = None,
    handedness: Optional[list[int]] = None,
    memory: Optional[list[Optional[dict]]] = None,
    move_cap: int = 8,
) -> World:
    if positions is None:
        n = len(polygon.outer)
        positions = [inward_point(polygon, (i * n) // k) for i in range(k)]
    frame_list: list[LocalFrame]
    if frames == "identity":
        frame_list = [LocalFrame.identity() for _ in range(k)]
    elif frames == "symmetric":
        positions, frame_list = symmetric_frames(polygon, k)
    elif frames == "random":
        frame_list = []
        for i in range(k):
            ex, ey = rational_rotation(policy_seed + 3 * i + 1)
            scale = F(1 + ((policy_seed + i) % 3), 1 + ((policy_seed + 2 * i) % 2))
            ex, ey = pmul(ex, scale), pmul(ey, scale)
            frame_list.append(LocalFrame(ex, ey))
    else:
        frame_list = list(frames)
    if handedness is not None:
        fixed = []
        for fr, h in zip(frame_list, handedness):
            if fr.handedness != h:
                fr = LocalFrame(fr.ex, Point(-fr.ey.x, -fr.ey.y))
            fixed.append(fr)
        frame_list = fixed
    searchers = []
    for i in range(k):
        seed_i = pivot_seeds[i] if pivot_seeds else 0
        if memory and memory[i] is not None:
            st = state_from_json(memory[i])
        else:
            st = fresh_state(algorithm, seed_i)
        searchers.append(SimSearcher(i, frame_list[i], positions[i], algorithm, st))
    return World(polygon, searchers, move_cap=move_cap)


def patrol_memory(P: PolygonWithHoles, algorithm: int, pivot_seed: int,
                  tour_pos: int) -> tuple[dict, Point]:
    """Seeded memory of a searcher already patrolling P (identity frame):
    correct complete map, PATROL action, standing at the given tour index.
    Returns (memory json, world position)."""
    if algorithm == 1:
        plan = canon.alg1_plan(P, pivot_seed)
        tour = plan.tours["CW"]
        idx = tour_pos % len(tour)
        mem = {
            "algorithm": 1,
            "pivot_seed": pivot_seed,
            "action": "PATROL",
            "direction": 1,
            "tour_index": idx,
            "cur_pos": _pt_json_raw(tour[idx]),
            "polygon": P.to_json_obj(),
        }
        return mem, tour[idx]
    plan = canon.alg2_plan(P, pivot_seed)
    if plan.rotational:
        d, j = plan.schedule.entry(0)
        tour = plan.j_tour(j, d)
        idx = tour_pos % len(tour)
        mem = {
            "algorithm": 2,
            "pivot_seed": pivot_seed,
            "action": "PATROL",
            "stage": 0,
            "tour_index": idx,
            "cur_pos": _pt_json_raw(tour[idx]),
            "polygon": P.to_json_obj(),
        }
        return mem, tour[idx]
    tour = plan.alg1.tours["CW"]
    idx = tour_pos % len(tour)
    mem = {
        "algorithm": 2,
        "pivot_seed": pivot_seed,
        "action": "PATROL",
        "stage": 1,
        "tour_index": idx,
        "cur_pos": _pt_json_raw(tour[idx]),
        "polygon": P.to_json_obj(),
    }
    return mem, tour[idx]


def _pt_json_raw(p: Point):
    return [scalar_to_json(p.x), scalar_to_json(p.y)]


# -- policies --------------------------------------------------------------------


class Policy:
    name = "abstract"

    def next(self, world: World) -> Directive:
        raise NotImplementedError


class SynchronousSymmetric(Policy):
    """Strictly staged rounds: every searcher Looks (at one shared instant),
    then every one Computes, then all moves start and complete.

    On an asymmetric configuration this simply degenerates to a fixed
    staged round-robin."""

    name = "synchronous_symmetric"

    def __init__(self):
        self.stage = "look"
        self.pending: list[int] = []

    def next(self, world: World) -> Directive:
        k = len(world.searchers)
        for _ in range(4):
            if self.stage == "look":
                if not self.pending:
                    self.pending = [s.sid for s in world.searchers if s.phase == "Idle"]
                if self.pending:
                    sid = self.pending.pop(0)
                    dt = F(1) if len(self.pending) == k - 1 else F(0)
                    if not self.pending:
                        self.stage = "compute"
                    return Directive(sid, "Look", dt=dt)
                self.stage = "compute"
            if self.stage == "compute":
                for s in world.searchers:
                    if s.phase == "Computing":
                        return Directive(s.sid, "FinishCompute", dt=F(0))
                self.stage = "start"
            if self.stage == "start":
                for s in world.searchers:
                    if s.phase == "MoveReady":
                        return Directive(s.sid, "StartMove", dt=F(0))
                self.stage = "advance"
            if self.stage == "advance":
                for s in world.searchers:
                    if s.phase == "Moving":
                        return Directive(s.sid, "AdvanceMove", F(1), dt=F(0))
                self.stage = "look"
        raise SimulationError("no serviceable phase in a synchronous round")


class RoundRobin(Policy):
    """One full Look-Compute-Move cycle per searcher, in id order."""

    name = "round_robin"

    def __init__(self):
        self.current = 0
        self.mid_cycle = False

    def next(self, world: World) -> Directive:
        k = len(world.searchers)
        s = world.searchers[self.current]
        if s.phase == "Idle" and self.mid_cycle:
            self.current = (self.current + 1) % k
            self.mid_cycle = False
            s = world.searchers[self.current]
        if s.phase == "Idle":
            self.mid_cycle = True
            return Directive(s.sid, "Look")
        if s.phase == "Computing":
            return Directive(s.sid, "FinishCompute", dt=F(0))
        if s.phase == "MoveReady":
            return Directive(s.sid, "StartMove", dt=F(0))
        return Directive(s.sid, "AdvanceMove", F(1))


class SeededRandom(Policy):
    name = "seeded_random"

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def next(self, world: World) -> Directive:
        legal = world.legal_directives()
        d = self.rng.choice(legal)
        if d.action == "AdvanceMove":
            f = self.rng.choice([F(1), F(1), F(1), F(1, 2), F(1, 3)])
            s = world.searchers[d.searcher]
            if s.advance_count >= world.move_cap - 1:
                f = F(1)
            d = replace(d, fraction=f)
        dt = F(self.rng.choice([0, 1, 1]))
        return replace(d, dt=dt)


class GreedyDelayer(Policy):
    """Omniscient meeting-avoidance with a fairness window.

    Within the window the scheduler picks, per step, the legal directive
    whose one-step outcome is furthest from producing mutual awareness,
    with a phase-separation term that keeps searchers far apart along the
    boundary (the branch-hiding strategy).  Fairness forces the most
    starved searcher through regularly, so every phase still finishes."""

    name = "greedy_delayer"

    def __init__(self, window: int = 96):
        self.window = window
        self.last_served: dict[int, int] = {}
        self.tick = 0
        self.active = 0
        self._ref_ring: Optional[list[Point]] = None
        self._alive_cache = None
        self._alive_key = None

    SAFE = 300

    def next(self, world: World) -> Directive:
        self.tick += 1
        d = None
        if len(world.searchers) == 2:
            gate = self._plan_gate(world)
            if gate is not None:
                d = self._choose_gated(world, gate)
        if d is None:
            d = self._choose_scored(world)
        self.last_served[d.searcher] = self.tick
        return replace(d, dt=F(1))

    # -- product-graph planning (two patrolling searchers) -----------------
    #
    # A joint configuration is (tour index, direction) per searcher; it is
    # safe when the two tour positions cannot see each other.  A perpetual
    # hiding schedule exists iff the current configuration lies in the
    # largest sub-graph of safe configurations closed under taking at least
    # one single-searcher step ("alive" set).  While it does, gating each
    # searcher's Compute commitment on keeping the configuration alive
    # starves the meeting forever; the scored fallback takes over otherwise.

    def _world_tours(self, world: World, s: SimSearcher):
        st = s.state
        if st.action != "PATROL" or st.polygon is None:
            return None
        cache = getattr(self, "_tour_cache", None)
        if cache is None:
            cache = self._tour_cache = {}
        cache_key = (s.sid, id(st.polygon), st.pivot_seed, st.algorithm, st.resets)
        if cache_key in cache:
            return cache[cache_key]
        try:
            if st.algorithm == 1:
                plan = canon.alg1_plan(st.polygon, st.pivot_seed)
                tours = plan.tours
            else:
                plan = canon.alg2_plan(st.polygon, st.pivot_seed)
                if plan.rotational:
                    return None
                tours = plan.alg1.tours
        except (GeometryError, ValueError):
            return None
        # st.cur_pos is the committed destination mid-move, so anchor the
        # frame mapping at the destination when one is pending
        anchor_world = s.dest if s.dest is not None else s.pos
        out = {}
        for dname, tour in tours.items():
            out[dname] = tuple(
                padd(anchor_world, s.frame.to_world_vec(psub(p, st.cur_pos)))
                for p in tour
            )
        cache[cache_key] = out
        return out

    def _node_of(self, s: SimSearcher):
        st = s.state
        if st.algorithm == 1:
            return (st.tour_index, "CW" if st.direction > 0 else "CCW")
        return (st.tour_index, "CW" if st.stage % 2 == 1 else "CCW")

    @staticmethod
    def _succ(node, L):
        idx, d = node
        if idx == 0:
            d = "CCW" if d == "CW" else "CW"
        return ((idx + 1) % L, d)

    def _plan_gate(self, world: World) -> Optional[dict]:
        a, b = world.searchers
        ta = self._world_tours(world, a)
        tb = self._world_tours(world, b)
        if ta is None or tb is None:
            return None
        L = len(ta["CW"])
        if len(tb["CW"]) != L:
            return None
        key = (id(world.polygon), a.state.polygon, a.state.pivot_seed,
               b.state.polygon, b.state.pivot_seed)
        alive = getattr(self, "_alive_cache", None)
        if alive is None or self._alive_key != key:
            alive = self._compute_alive(world, ta, tb, L)
            self._alive_cache = alive
            self._alive_key = key
        na, nb = self._node_of(a), self._node_of(b)
        if (na, nb) not in alive:
            return None
        ga = (self._succ(na, L), nb) in alive
        gb = (na, self._succ(nb, L)) in alive
        if not (ga or gb):
            return None
        return {a.sid: ga, b.sid: gb}

    def _compute_alive(self, world, ta, tb, L):
        posa = {}
        posb = {}
        for d in ("CW", "CCW"):
            for i in range(L):
                posa[(i, d)] = ta[d][i]
                posb[(i, d)] = tb[d][i]
        nodes_a = list(posa)
        nodes_b = list(posb)
        safe = set()
        for na in nodes_a:
            for nb in nodes_b:
                pa, pb = posa[na], posb[nb]
                if pa != pb and not world._pair_visible(pa, pb):
                    safe.add((na, nb))
        alive = set(safe)
        changed = True
        while changed:
            changed = False
            for node in list(alive):
                na, nb = node
                if ((self._succ(na, L), nb) not in alive
                        and (na, self._succ(nb, L)) not in alive):
                    alive.discard(node)
                    changed = True
        return alive

    def _choose_gated(self, world: World, gate: dict) -> Optional[Directive]:
        a = world.searchers[self.active]
        b = world.searchers[1 - self.active]

        def service(x: SimSearcher, minimal: bool) -> Optional[Directive]:
            if x.phase == "Idle":
                return Directive(x.sid, "Look")
            if x.phase == "Computing":
                if not gate[x.sid]:
                    return None  # committing would leave the alive set
                return Directive(x.sid, "FinishCompute")
            if x.phase == "MoveReady":
                return Directive(x.sid, "StartMove")
            if minimal and x.advance_count < world.move_cap - 1:
                return Directive(x.sid, "AdvanceMove", F(1, 2))
            return Directive(x.sid, "AdvanceMove", F(1))

        if self.tick - self.last_served.get(b.sid, 0) > self.window:
            d = service(b, minimal=True)
            if d is not None:
                return d
            d = service(a, minimal=False)
            if d is not None:
                return d
            return None
        d = service(a, minimal=False)
        if d is not None:
            return d
        d = service(b, minimal=False)
        if d is not None:
            self.active = b.sid
            return d
        return None

    def _choose_scored(self, world: World) -> Directive:
        legal = world.legal_directives()
        by_sid: dict[int, list[Directive]] = {}
        for d in legal:
            by_sid.setdefault(d.searcher, []).append(d)
        starved = sorted(world.searchers, key=lambda s: self.last_served.get(s.sid, 0))
        if starved and self.tick - self.last_served.get(starved[0].sid, 0) > self.window:
            sid = starved[0].sid
            key, cand = self._best_of(world, by_sid.get(sid, legal))
            if key[0] < 5000 or self.tick - self.last_served.get(sid, 0) > 4 * self.window:
                return cand
        k = len(world.searchers)
        for off in range(k):
            sid = (self.active + off) % k
            if sid not in by_sid:
                continue
            key, cand = self._best_of(world, by_sid[sid])
            if key[0] < self.SAFE:
                self.active = sid
                return cand
        return self._best_of(world, legal)[1]

    def _best_of(self, world: World, candidates: list[Directive]):
        best = None
        for d in candidates:
            score = self._score(world, d)
            key = (score, d.searcher, d.action, d.fraction or F(0))
            if best is None or key < best[0]:
                best = (key, d)
        return best

    def _ring(self, world: World) -> list[Point]:
        if self._ref_ring is None:
            ring = []
            for ri, r in enumerate(world.polygon.rings):
                ring.extend(r)
            self._ref_ring = ring
        return self._ref_ring

    def _phase_of(self, world: World, s: SimSearcher) -> Optional[int]:
        ring = self._ring(world)
        anchor = s.move_start if s.move_start is not None else s.pos
        try:
            return ring.index(anchor)
        except ValueError:
            return None

    def _predict_dest(self, world: World, s: SimSearcher) -> Optional[Point]:
        """Where this searcher's next completed cycle will take it, if its
        patrol plan makes that cheap to read off."""
        st = s.state
        if st.action != "PATROL" or st.polygon is None:
            return None
        try:
            if st.algorithm == 1:
                plan = canon.alg1_plan(st.polygon, st.pivot_seed)
                direction = st.direction
                if st.tour_index == 0 and st.cur_pos == plan.pivot.location:
                    direction = -direction
                tour = plan.tours["CW" if direction > 0 else "CCW"]
            else:
                plan = canon.alg2_plan(st.polygon, st.pivot_seed)
                if plan.rotational:
                    if st.stage < 0:
                        return None
                    dname, j = plan.schedule.entry(st.stage)
                    tour = plan.j_tour(j, dname)
                else:
                    tour = plan.alg1.tours["CW" if st.stage % 2 == 1 else "CCW"]
            dest_mem = tour[(st.tour_index + 1) % len(tour)]
        except (GeometryError, ValueError, IndexError):
            return None
        return padd(s.pos, s.frame.to_world_vec(psub(dest_mem, st.cur_pos)))

    def _score(self, world: World, d: Directive) -> int:
        """Potential of the one-step successor state.

        What actually kills a delaying scheduler is Look-time visibility:
        a Look that sees someone both freezes the looker (idle rule) and
        arms mutual awareness.  Transiting visible ground is free while the
        other side cannot Look.  The potential therefore punishes, in
        order: meetings, armed pairs still in sight, Idle searchers sitting
        visibly (their only directive is the fatal Look), and arrivals that
        produce such states; a mild separation term keeps tours staggered."""
        w = world.copy()
        try:
            w.step(replace(d, dt=F(1)))
        except SimulationError:
            return 10**6
        if w.outcome is not None:
            return 10**6
        score = 0
        n_ring = len(self._ring(w))
        for i in range(len(w.searchers)):
            for j in range(i + 1, len(w.searchers)):
                a, b = w.searchers[i], w.searchers[j]
                vis = w._pair_visible(a.pos, b.pos)
                if vis:
                    idle_a = a.phase == "Idle"
                    idle_b = b.phase == "Idle"
                    if idle_a and idle_b:
                        score += 20000
                    armed = (b.sid in a.last_saw) or (a.sid in b.last_saw)
                    if armed:
                        score += 5000
                    if idle_a or idle_b:
                        score += 400
                    score += 25
                pa, pb = self._phase_of(w, a), self._phase_of(w, b)
                if pa is not None and pb is not None and n_ring:
                    gap = abs(pa - pb)
                    gap = min(gap, n_ring - gap)
                    score += min(20, max(0, n_ring // 3 - gap))
        return score


class ScriptPolicy(Policy):
    name = "script"

    def __init__(self, directives: Sequence[Directive]):
        self.directives = list(directives)
        self.i = 0

    def next(self, world: World) -> Directive:
        if self.i >= len(self.directives):
            raise SimulationError("script exhausted")
        d = self.directives[self.i]
        self.i += 1
        return d


def builtin_policies() -> dict[str, Callable[..., Policy]]:
    return {
        "synchronous_symmetric": lambda **kw: SynchronousSymmetric(),
        "round_robin": lambda **kw: RoundRobin(),
        "seeded_random": lambda seed=0, **kw: SeededRandom(seed),
        "greedy_delayer": lambda window=24, **kw: GreedyDelayer(window),
    }


# -- traces ------------------------------------------------------------------------


def _pt_json(p: Point):
    return [scalar_to_json(p.x), scalar_to_json(p.y)]


@dataclass
class Trace:
    records: list[dict] = field(default_factory=list)
    outcome: Optional[tuple] = None

    def append(self, t: Fraction, d: Directive, pos: Point, events: list[dict]):
        self.records.append(
            {
                "t": scalar_to_json(t),
                "searcher": d.searcher,
                "action": d.action,
                "fraction": scalar_to_json(d.fraction) if d.fraction is not None else None,
                "dt": scalar_to_json(d.dt),
                "pos": _pt_json(pos),
                "events": events,
            }
        )

    def to_jsonl(self) -> str:
        lines = [json.dumps(r, separators=(",", ":")) for r in self.records]
        out = None
        if self.outcome is not None:
            out = {
                "outcome": self.outcome[0],
                "pair": list(self.outcome[1]) if self.outcome[0] == "met" else None,
                "t": scalar_to_json(self.outcome[2]) if self.outcome[0] == "met" else None,
            }
        else:
            out = {"outcome": "budget_exhausted"}
        lines.append(json.dumps(out, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def directives(self) -> list[Directive]:
        out = []
        for r in self.records:
            out.append(
                Directive(
                    r["searcher"],
                    r["action"],
                    Fraction(r["fraction"]) if r["fraction"] else None,
                    Fraction(r["dt"]),
                )
            )
        return out


def run(world: World, policy: Policy, budget: int) -> Trace:
    if budget <= 0:
        raise ValueError("budget must be positive")
    trace = Trace()
    while world.outcome is None and world.directive_count < budget:
        d = policy.next(world)
        events = world.step(d)
        trace.append(world.clock, d, world.searchers[d.searcher].pos, events)
    trace.outcome = world.outcome
    return trace
