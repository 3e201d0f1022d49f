"""Session service: world creation, state views, directive application.

The adversary console (and scripted remote runs) drive simulations through
four endpoints: POST /sessions, GET /sessions/{id}/view,
POST /sessions/{id}/directives, GET /sessions/{id}/trace.  All decisions
happen server-side on exact values; floats accompany them for rendering
only.  Directive application is serialized per session; an idempotency
key makes retries safe.
"""

from __future__ import annotations

import threading
import uuid
from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from polymeet import canon, fixtures
from polymeet.geometry import Point, PolygonWithHoles, PolygonValidationError
from polymeet.scalars import scalar_float, scalar_to_json
from polymeet.simulator import (
    Directive,
    DirectiveError,
    LocalFrame,
    Trace,
    World,
    build_world,
    patrol_memory,
)
from polymeet.symmetry import symmetricity

F = Fraction


class SessionConfig(BaseModel):
    fixture: Optional[str] = None
    fixture_params: dict = Field(default_factory=dict)
    polygon: Optional[dict] = None
    algorithm: int = 1
    searchers: int = 2
    frames: str = "identity"           # identity | symmetric | random
    policy_seed: int = 0
    pivot_seeds: Optional[list[int]] = None
    handedness: Optional[list[int]] = None
    memory: Optional[list[Optional[dict]]] = None
    move_cap: int = 8


class DirectivePayload(BaseModel):
    searcher: int
    action: str
    fraction: Optional[str] = None     # exact "num/den"
    dt: str = "1"
    idempotency_key: Optional[str] = None


class Session:
    def __init__(self, sid: str, world: World, config: SessionConfig):
        self.id = sid
        self.world = world
        self.config = config
        self.trace = Trace()
        self.lock = threading.Lock()
        self.idempotency: dict[str, dict] = {}


SESSIONS: dict[str, Session] = {}


def _pt(p: Point):
    return {
        "exact": [scalar_to_json(p.x), scalar_to_json(p.y)],
        "float": [scalar_float(p.x), scalar_float(p.y)],
    }


def _polyline(points):
    return [_pt(p) for p in points]


def build_view(session: Session) -> dict:
    w = session.world
    P = w.polygon
    searchers = []
    for s in w.searchers:
        entry = {
            "id": s.sid,
            "phase": s.phase,
            "algorithm": s.algorithm,
            "action": s.state.action,
            "stage": s.state.stage,
            "direction": s.state.direction,
            "resets": s.state.resets,
            "position": _pt(s.pos),
            "handedness": s.frame.handedness,
        }
        if s.dest is not None:
            entry["destination"] = _pt(s.dest)
        try:
            region = canon.region(P, s.pos)
            entry["visibility"] = [
                {"a": _pt(pc.a), "b": _pt(pc.b)} for pc in region.pieces
            ]
        except Exception:
            entry["visibility"] = []
        tour = _current_tour(s)
        if tour is not None:
            entry["tour"] = _polyline(tour)
        searchers.append(entry)
    prof = symmetricity(P)
    rotation_symmetric = _rotation_symmetric(w, prof)
    legal = [d.to_json() for d in w.legal_directives()]
    outcome = None
    if w.outcome is not None:
        outcome = {
            "kind": w.outcome[0],
            "pair": list(w.outcome[1]),
            "t": scalar_to_json(w.outcome[2]),
        }
    return {
        "clock": scalar_to_json(w.clock),
        "directives_applied": w.directive_count,
        "outcome": outcome,
        "polygon": {
            "exact": P.to_json_obj(),
            "float": P.float_rings(),
        },
        "sigma": prof.sigma,
        "rotation_symmetric": rotation_symmetric,
        "searchers": searchers,
        "awareness": [
            {
                "id": s.sid,
                "last_look_t": scalar_to_json(s.last_look_t) if s.last_look_t is not None else None,
                "saw": sorted(s.last_saw),
            }
            for s in w.searchers
        ],
        "legal_directives": legal,
    }


def _current_tour(s):
    st = s.state
    if st.action != "PATROL" or st.polygon is None:
        return None
    try:
        if st.algorithm == 1:
            plan = canon.alg1_plan(st.polygon, st.pivot_seed)
            tour = plan.tours["CW" if st.direction > 0 else "CCW"]
        else:
            plan = canon.alg2_plan(st.polygon, st.pivot_seed)
            if plan.rotational:
                if st.stage < 0:
                    return None
                d, j = plan.schedule.entry(st.stage)
                tour = plan.j_tour(j, d)
            else:
                tour = plan.alg1.tours["CW" if st.stage % 2 == 1 else "CCW"]
    except Exception:
        return None
    anchor = s.dest if s.dest is not None else s.pos
    from polymeet.geometry import padd, psub

    return [padd(anchor, s.frame.to_world_vec(psub(p, st.cur_pos))) for p in tour]


def _rotation_symmetric(w: World, prof) -> bool:
    if prof.sigma < 2 or len(w.searchers) < 2:
        return False
    rots = [g for g in prof.group if not g.is_reflection]
    positions = [(s.pos.x, s.pos.y) for s in w.searchers]
    pos_set = set(positions)
    for g in rots:
        if g.perm == tuple(range(len(g.perm))):
            continue
        imgs = {( (q := g.transform.apply(Point(x, y))).x, q.y) for x, y in positions}
        if imgs == pos_set:
            return True
    return False


def create_app() -> FastAPI:
    app = FastAPI(title="polymeet adversary service")

    @app.post("/sessions")
    def create_session(config: SessionConfig):
        try:
            if config.polygon is not None:
                P = PolygonWithHoles.from_json_obj(config.polygon)
            elif config.fixture is not None:
                P = fixtures.build(config.fixture, **config.fixture_params)
            else:
                raise HTTPException(400, "config needs a fixture or a polygon")
        except PolygonValidationError as exc:
            raise HTTPException(422, f"invalid polygon: {exc}")
        except KeyError as exc:
            raise HTTPException(422, f"unknown fixture: {exc}")
        try:
            world = build_world(
                P,
                config.algorithm,
                config.searchers,
                policy_seed=config.policy_seed,
                frames=config.frames,
                pivot_seeds=config.pivot_seeds,
                handedness=config.handedness,
                memory=config.memory,
                move_cap=config.move_cap,
            )
        except (ValueError, PolygonValidationError) as exc:
            raise HTTPException(422, f"invalid configuration: {exc}")
        sid = uuid.uuid4().hex
        SESSIONS[sid] = Session(sid, world, config)
        return {"id": sid}

    @app.get("/sessions/{sid}/view")
    def get_view(sid: str):
        session = SESSIONS.get(sid)
        if session is None:
            raise HTTPException(404, "unknown session")
        with session.lock:
            return build_view(session)

    @app.post("/sessions/{sid}/directives")
    def apply_directive(sid: str, payload: DirectivePayload):
        session = SESSIONS.get(sid)
        if session is None:
            raise HTTPException(404, "unknown session")
        with session.lock:
            if payload.idempotency_key and payload.idempotency_key in session.idempotency:
                return session.idempotency[payload.idempotency_key]
            d = Directive(
                payload.searcher,
                payload.action,
                Fraction(payload.fraction) if payload.fraction else None,
                Fraction(payload.dt),
            )
            try:
                events = session.world.step(d)
            except DirectiveError as exc:
                raise HTTPException(409, f"illegal directive: {exc}")
            session.trace.append(
                session.world.clock, d, session.world.searchers[d.searcher].pos, events
            )
            session.trace.outcome = session.world.outcome
            response = {"events": events, "view": build_view(session)}
            if payload.idempotency_key:
                session.idempotency[payload.idempotency_key] = response
            return response

    @app.get("/sessions/{sid}/trace")
    def get_trace(sid: str):
        session = SESSIONS.get(sid)
        if session is None:
            raise HTTPException(404, "unknown session")
        with session.lock:
            body = session.trace.to_jsonl()
            digest = session.trace.digest()
        return PlainTextResponse(
            body,
            headers={
                "X-Content-Digest": f"sha256:{digest}",
                "Content-Disposition": f'attachment; filename="{digest}.jsonl"',
            },
        )

    return app


app = create_app()
