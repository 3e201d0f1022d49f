"""World stepping, awareness ledger, policies, trace replay."""

from fractions import Fraction as F

import pytest

from polymeet import canon, fixtures as fx
from polymeet.geometry import Point, visible
from polymeet.scalars import scalar_from_json
from polymeet.simulator import (
    Directive,
    DirectiveError,
    GreedyDelayer,
    RoundRobin,
    ScriptPolicy,
    SeededRandom,
    SynchronousSymmetric,
    World,
    build_world,
    builtin_policies,
    inward_point,
    patrol_memory,
    run,
    symmetric_frames,
)


def test_illegal_directives_rejected_without_state_change():
    w = build_world(fx.square_polygon(), 1, 2)
    pos_before = [s.pos for s in w.searchers]
    with pytest.raises(DirectiveError):
        w.step(Directive(0, "FinishCompute"))
    with pytest.raises(DirectiveError):
        w.step(Directive(0, "AdvanceMove", F(1, 2)))
    with pytest.raises(DirectiveError):
        w.step(Directive(7, "Look"))
    w.step(Directive(0, "Look"))
    with pytest.raises(DirectiveError):
        w.step(Directive(0, "Look"))
    assert [s.pos for s in w.searchers] == pos_before


def test_two_searchers_convex_meet():
    w = build_world(fx.square_polygon(), 1, 2)
    w.step(Directive(0, "Look"))
    assert w.outcome is None
    w.step(Directive(1, "Look"))
    assert w.outcome is not None and w.outcome[0] == "met"


def test_see_then_hide_not_aware():
    """a sees b; b moves behind a wall and looks from there without seeing
    a: no mutual awareness."""
    L = fx.l_polygon()
    pa = Point(F(3), F(1))        # lower arm
    pb = Point(F(1), F(1))        # corner area, visible from pa
    hidden = Point(F(1, 2), F(15, 4))  # upper arm, hidden from pa
    assert visible(L, pa, pb) and not visible(L, pa, hidden)
    w = build_world(L, 1, 2, positions=[pa, pb])
    w.step(Directive(0, "Look"))          # a sees b
    assert 1 in w.searchers[0].last_saw
    # adversarially teleporting is not allowed; emulate by driving b's cycle
    # with a scripted move: b looks (sees a), but we only check the ledger
    # definition here via the awareness predicate on a fresh world
    w2 = build_world(L, 1, 2, positions=[pa, hidden])
    w2.step(Directive(0, "Look"))
    w2.step(Directive(1, "Look"))
    assert w2.outcome is None
    assert w2.searchers[1].last_saw == frozenset()


def test_awareness_requires_no_intervening_look():
    sq = fx.square_polygon()
    w = build_world(sq, 1, 2)
    w.step(Directive(0, "Look"))               # a sees b at t1
    w.step(Directive(0, "FinishCompute"))      # a idles (sees someone)
    w.step(Directive(0, "Look"))               # a looks again (still sees)
    w.step(Directive(1, "Look"))               # b sees a: aware via a's LAST look
    assert w.outcome is not None


def test_positions_always_inside_and_moves_visible():
    P = fx.fig3_polygon()
    w = build_world(P, 1, 3, frames="random", policy_seed=5)
    policy = SeededRandom(3)
    tr = run(w, policy, 800)
    for r in tr.records:
        x = Point(scalar_from_json(r["pos"][0]), scalar_from_json(r["pos"][1]))
        assert P.contains(x)


def test_awareness_ledger_matches_bruteforce():
    """Recompute mutual awareness from the raw look log and compare with the
    simulator's outcome."""
    P = fx.comb_polygon()
    w = build_world(P, 1, 2, frames="random", policy_seed=2)
    tr = run(w, SeededRandom(17), 4000)
    looks = []  # (t, sid, saw)
    for r in tr.records:
        for e in r["events"]:
            if e.get("kind") == "look":
                looks.append((F(r["t"]), r["searcher"], set(e["saw"])))
    met_brute = None
    last = {}
    for t, sid, saw in looks:
        for other in saw:
            if other in last:
                t1, osaw = last[other]
                prev = [tt for tt, s2, _ in looks if s2 == sid and tt < t]
                prev_t = prev[-1] if prev else None
                if sid in osaw and (prev_t is None or prev_t <= t1):
                    met_brute = (tuple(sorted((sid, other))), t)
                    break
        if met_brute:
            break
        last[sid] = (t, saw)
    if tr.outcome is not None and tr.outcome[0] == "met":
        assert met_brute is not None
        assert met_brute[0] == tuple(tr.outcome[1])
    else:
        assert met_brute is None


def test_symmetric_rounds_preserve_symmetry():
    P = fx.star_polygon(4)
    from polymeet.symmetry import symmetricity

    prof = symmetricity(P)
    rot = next(
        g for g in prof.group
        if not g.is_reflection and g.transform.m00 == 0 and g.transform.m10 == 1
    )
    w = build_world(P, 1, 4, frames="symmetric")
    policy = SynchronousSymmetric()
    for round_no in range(40):
        d = policy.next(w)
        w.step(d)
        if all(s.phase == "Idle" for s in w.searchers):
            for i in range(4):
                expect = rot.transform.apply(w.searchers[i].pos)
                assert w.searchers[(i + 1) % 4].pos == expect
    assert w.outcome is None


def test_replay_determinism_bit_identical():
    P = fx.fig3_polygon()
    for policy_fn in (lambda: SeededRandom(9), lambda: RoundRobin(), lambda: GreedyDelayer(32)):
        w1 = build_world(P, 2, 2, frames="random", policy_seed=4)
        tr1 = run(w1, policy_fn(), 600)
        w2 = build_world(P, 2, 2, frames="random", policy_seed=4)
        tr2 = run(w2, ScriptPolicy(tr1.directives()), len(tr1.records))
        assert tr1.to_jsonl() == tr2.to_jsonl()
        assert tr1.digest() == tr2.digest()


def test_policy_determinism():
    P = fx.l_polygon()
    outs = set()
    for _ in range(3):
        w = build_world(P, 1, 2)
        tr = run(w, SeededRandom(123), 500)
        outs.add(tr.digest())
    assert len(outs) == 1


def test_builtin_policy_registry():
    reg = builtin_policies()
    assert set(reg) == {"synchronous_symmetric", "round_robin", "seeded_random", "greedy_delayer"}
    p = reg["seeded_random"](seed=5)
    assert isinstance(p, SeededRandom)


def test_move_cap_forces_completion():
    w = build_world(fx.square_polygon(), 1, 1, move_cap=4)
    w.step(Directive(0, "Look"))
    w.step(Directive(0, "FinishCompute"))
    w.step(Directive(0, "StartMove"))
    w.step(Directive(0, "AdvanceMove", F(1, 2)))
    w.step(Directive(0, "AdvanceMove", F(1, 2)))
    w.step(Directive(0, "AdvanceMove", F(1, 2)))
    with pytest.raises(DirectiveError):
        w.step(Directive(0, "AdvanceMove", F(1, 2)))
    w.step(Directive(0, "AdvanceMove", F(1)))
    assert w.searchers[0].phase == "Idle"


def test_theorem1_style_stalemate_star2():
    P = fx.star_polygon(2)
    w = build_world(P, 1, 2, frames="symmetric")
    tr = run(w, SynchronousSymmetric(), 3000)
    assert tr.outcome is None


def test_sigma_plus_one_meets_star2():
    P = fx.star_polygon(2)
    w = build_world(P, 1, 3, frames="random", policy_seed=1, pivot_seeds=[0, 1, 0])
    tr = run(w, SeededRandom(21), 60000)
    assert tr.outcome is not None and tr.outcome[0] == "met"


def test_strawman_budget_exhausted_and_alg2_meets():
    P = fx.four_branch_polygon()
    plan0 = canon.alg1_plan(P, 0)
    plan2 = canon.alg1_plan(P, 2)
    iA = plan0.tours["CW"].index(Point(F(10), F(10)))
    iB = plan2.tours["CW"].index(Point(F(-10), F(-10)))
    memA, posA = patrol_memory(P, 1, 0, iA)
    memB, posB = patrol_memory(P, 1, 2, iB)
    w = build_world(P, 1, 2, positions=[posA, posB], memory=[memA, memB])
    tr = run(w, GreedyDelayer(96), 2500)
    assert tr.outcome is None
    memA2, posA2 = patrol_memory(P, 2, 0, 3)
    memB2, posB2 = patrol_memory(P, 2, 2, 9)
    w2 = build_world(P, 2, 2, positions=[posA2, posB2], memory=[memA2, memB2])
    tr2 = run(w2, GreedyDelayer(96), 100000)
    assert tr2.outcome is not None and tr2.outcome[0] == "met"
