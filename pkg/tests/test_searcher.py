"""Compute-procedure tests: exploration, patrol, consistency, resets."""

from dataclasses import replace
from fractions import Fraction as F

import pytest

from polymeet import canon, fixtures as fx
from polymeet.geometry import Point, padd, psub
from polymeet.searcher import (
    check_consistency,
    compute,
    explore_next_target,
    fresh_state,
    snapshot_from_region,
    state_from_json,
    state_to_json,
)


def replay(P, start, algorithm, seed=0, steps=60, transform=None):
    """Drive a single searcher with an identity frame through P."""
    state = replace(fresh_state(algorithm, seed), cur_pos=start)
    pos = start
    hist = []
    for _ in range(steps):
        snap = snapshot_from_region(canon.region(P, pos), False)
        out = compute(state, snap)
        hist.append((pos, state.action, out.reset_occurred))
        pos = padd(pos, out.destination)
        state = out.state
    return state, pos, hist


def inward(P, k=0):
    from polymeet.simulator import inward_point

    return inward_point(P, k)


def test_fresh_convex_explore_one_hop_targets():
    P = fx.square_polygon()
    start = inward(P)
    state = replace(fresh_state(1), cur_pos=start)
    snap = snapshot_from_region(canon.region(P, start), False)
    out = compute(state, snap)
    # all four corners visible: first target is one hop away
    assert out.destination != Point(F(0), F(0))
    assert out.state.action == "EXPLORE"
    tgt = explore_next_target(state) or explore_next_target(out.state)
    assert padd(start, out.destination) in P.vertex_set()


def test_explore_visits_every_vertex_comb():
    P = fx.comb_polygon()
    st, _, hist = replay(P, inward(P), 1, steps=40)
    assert st.action == "PATROL"
    assert st.resets == 0
    assert all(v.visited for v in st.map.vertices.values())
    assert len(st.map.vertices) == len(P.vertices())


def test_explore_termination_bound_recorded():
    for name in ("square", "l_shape", "comb", "star4", "fig3"):
        P = fx.by_name(name).build()
        st, _, hist = replay(P, inward(P), 1, steps=80)
        explore_steps = sum(1 for _, a, _ in hist if a == "EXPLORE")
        assert st.action == "PATROL"
        assert explore_steps <= 3 * len(P.vertices()) + 4


def test_idle_rule():
    P = fx.square_polygon()
    start = inward(P)
    state = replace(fresh_state(1), cur_pos=start)
    snap = snapshot_from_region(canon.region(P, start), True)
    out = compute(state, snap)
    assert out.destination == Point(F(0), F(0))
    assert out.state == state


def test_determinism_bit_exact():
    P = fx.fig3_polygon()
    start = inward(P)
    state = replace(fresh_state(2), cur_pos=start)
    snap = snapshot_from_region(canon.region(P, start), False)
    o1 = compute(state, snap)
    o2 = compute(state, snap)
    assert o1.destination == o2.destination
    assert o1.state == o2.state


def test_patrol_tour_matches_augmentation_star4():
    P = fx.star_polygon(4)
    st, pos, _ = replay(P, inward(P), 1, steps=80)
    assert st.action == "PATROL"
    plan = canon.alg1_plan(st.polygon, st.pivot_seed)
    # full replay continues along the planned tour
    tour = plan.tours["CW" if st.direction > 0 else "CCW"]
    assert tour[st.tour_index] == st.cur_pos
    # pivot lies on an axis of the reconstructed polygon
    assert plan.pivot.axis is not None


def test_same_pivot_opposite_directions_share_edges():
    # two searchers with the same pivot traverse the same tour; opposite
    # directions produce the same edge set walked in reverse
    P = fx.fig3_polygon()
    plan = canon.alg1_plan(P, 0)
    cw, ccw = plan.tours["CW"], plan.tours["CCW"]
    edges_cw = {frozenset([(a.x, a.y), (b.x, b.y)]) for a, b in zip(cw, cw[1:] + cw[:1])}
    edges_ccw = {frozenset([(a.x, a.y), (b.x, b.y)]) for a, b in zip(ccw, ccw[1:] + ccw[:1])}
    assert edges_cw == edges_ccw


def test_consistency_empty_history():
    st = fresh_state(1)
    P = fx.square_polygon()
    snap = snapshot_from_region(canon.region(P, inward(P)), False)
    assert check_consistency(replace(st, cur_pos=inward(P)), snap) == "consistent"


def test_consistency_self_replay():
    P = fx.comb_polygon()
    st, pos, _ = replay(P, inward(P), 1, steps=40)
    snap = snapshot_from_region(canon.region(P, pos), False)
    assert check_consistency(st, snap) == "consistent"


def test_fake_map_reset_on_hidden_hole():
    """A searcher seeded with the externally-plausible symmetric map resets
    once its tour reaches a viewpoint exposing the hidden hole."""
    real = fx.hidden_hole_polygon()
    fake = fx.hidden_hole_polygon(include_center=False)
    from polymeet.simulator import patrol_memory

    mem, pos = patrol_memory(fake, 1, 0, 0)
    state = state_from_json(mem)
    cur = pos
    resets = 0
    seen_reset_at = None
    for i in range(200):
        snap = snapshot_from_region(canon.region(real, cur), False)
        out = compute(state, snap)
        if out.reset_occurred:
            resets += 1
            if seen_reset_at is None:
                seen_reset_at = i
        state = out.state
        cur = padd(cur, out.destination)
        if state.action == "PATROL" and resets:
            break
    assert resets == 1
    # after the reset the rebuilt map matches the real polygon
    assert state.resets == 1
    for _ in range(400):
        if state.action == "PATROL":
            break
        snap = snapshot_from_region(canon.region(real, cur), False)
        out = compute(state, snap)
        assert not out.reset_occurred
        state = out.state
        cur = padd(cur, out.destination)
    assert state.action == "PATROL"
    assert state.polygon is not None
    assert len(state.polygon.holes) == len(real.holes)


def test_boundary_views_match_fake_polygon():
    real = fx.hidden_hole_polygon()
    fake = fx.hidden_hole_polygon(include_center=False)
    from polymeet.searcher import expected_snapshot_pieces
    from polymeet.simulator import inward_point

    for k in (0, 1, 2, 3):
        p = inward_point(real, k)
        # viewpoints on (near) the outer boundary see identical geometry
        assert expected_snapshot_pieces(real, p) == expected_snapshot_pieces(fake, p)


def test_state_serialization_roundtrip():
    P = fx.fig3_polygon()
    from polymeet.simulator import patrol_memory

    mem, pos = patrol_memory(P, 1, 0, 3)
    st = state_from_json(mem)
    st2 = state_from_json(state_to_json(st))
    assert st2.cur_pos == st.cur_pos
    assert st2.action == st.action
    assert st2.polygon == st.polygon


def test_similarity_equivariance_of_compute():
    """Transforming the world and the searcher's frame together leaves the
    local computation unchanged; world destinations map through the
    transform at every step."""
    from polymeet.geometry import Similarity, transform_polygon
    from polymeet.searcher import Snapshot, canonicalize_pieces
    from polymeet.simulator import LocalFrame

    P = fx.comb_polygon()
    T = Similarity.mapping_segment(
        Point(F(0), F(0)), Point(F(1), F(0)),
        Point(F(2), F(3)), Point(F(2), F(3) + F(2, 3)),
    )
    P2 = transform_polygon(P, T)
    frame2 = LocalFrame(T.apply_vec(Point(F(1), F(0))), T.apply_vec(Point(F(0), F(1))))
    start = inward(P)
    start2 = T.apply(start)

    def snap_in_frame(Q, pos, frame):
        region = canon.region(Q, pos)
        pieces = [
            (frame.to_local_vec(psub(pc.a, pos)), frame.to_local_vec(psub(pc.b, pos)),
             pc.a_full_vertex, pc.b_full_vertex)
            for pc in region.pieces
        ]
        return Snapshot(canonicalize_pieces(pieces), False)

    s1 = replace(fresh_state(1), cur_pos=Point(F(0), F(0)))
    s2 = replace(fresh_state(1), cur_pos=Point(F(0), F(0)))
    id_frame = LocalFrame.identity()
    p1, p2 = start, start2
    for _ in range(25):
        o1 = compute(s1, snap_in_frame(P, p1, id_frame))
        o2 = compute(s2, snap_in_frame(P2, p2, frame2))
        assert o1.destination == o2.destination  # identical local outputs
        p1 = padd(p1, id_frame.to_world_vec(o1.destination))
        p2 = padd(p2, frame2.to_world_vec(o2.destination))
        assert p2 == T.apply(p1)
        s1, s2 = o1.state, o2.state
    assert s1.action == s2.action


def test_alg2_stage_arithmetic_example():
    # m=2, t=3, stage=21 -> j = min(2, 22-21) = 1, counterclockwise
    from polymeet.augmentation import StageSchedule

    sch = StageSchedule(2, 3)
    assert sch.entry(21) == ("CCW", 1)
    assert sch.entry(0) == ("CW", 0)
    assert sch.entry(2) == ("CCW", 2)


def test_alg2_enters_stage_zero_at_pivot():
    P = fx.four_branch_polygon()
    st, pos, hist = replay(P, inward(P), 2, steps=120)
    assert st.action == "PATROL"
    assert st.stage >= 0
    plan = canon.alg2_plan(st.polygon, st.pivot_seed)
    assert plan.rotational
    d, j = plan.schedule.entry(st.stage)
    tour = plan.j_tour(j, d)
    assert tour[st.tour_index] == st.cur_pos
