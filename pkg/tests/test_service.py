"""Session service tests over the HTTP interface."""

import json
from fractions import Fraction as F

import pytest
from fastapi.testclient import TestClient

from polymeet.service import SESSIONS, create_app


@pytest.fixture()
def client():
    SESSIONS.clear()
    return TestClient(create_app())


def make_session(client, **overrides):
    config = {"fixture": "star3", "algorithm": 1, "searchers": 3}
    config.update(overrides)
    r = client.post("/sessions", json=config)
    assert r.status_code == 200, r.text
    return r.json()["id"]


def test_create_and_view(client):
    sid = make_session(client)
    r = client.get(f"/sessions/{sid}/view")
    assert r.status_code == 200
    view = r.json()
    assert view["outcome"] is None
    assert len(view["searchers"]) == 3
    assert all(s["phase"] == "Idle" for s in view["searchers"])
    assert view["sigma"] == 3
    assert {d["action"] for d in view["legal_directives"]} == {"Look"}


def test_invalid_polygon_rejected(client):
    bad = {"polygon": {"outer": [["0/1", "0/1"], ["1/1", "0/1"]]}, "searchers": 2}
    r = client.post("/sessions", json=bad)
    assert r.status_code == 422
    assert "ring" in r.json()["detail"]


def test_unknown_session_404(client):
    assert client.get("/sessions/zzz/view").status_code == 404


def test_illegal_directive_rejected_and_state_unchanged(client):
    sid = make_session(client)
    before = client.get(f"/sessions/{sid}/view").json()
    r = client.post(
        f"/sessions/{sid}/directives",
        json={"searcher": 0, "action": "FinishCompute"},
    )
    assert r.status_code == 409
    after = client.get(f"/sessions/{sid}/view").json()
    assert before == after


def test_directive_flow_and_idempotency(client):
    sid = make_session(client, fixture="square", searchers=2)
    r1 = client.post(
        f"/sessions/{sid}/directives",
        json={"searcher": 0, "action": "Look", "idempotency_key": "k1"},
    )
    assert r1.status_code == 200
    r2 = client.post(
        f"/sessions/{sid}/directives",
        json={"searcher": 0, "action": "Look", "idempotency_key": "k1"},
    )
    assert r2.status_code == 200
    assert r2.json() == r1.json()
    # directing the second searcher to look completes the meeting
    r3 = client.post(f"/sessions/{sid}/directives", json={"searcher": 1, "action": "Look"})
    view = r3.json()["view"]
    assert view["outcome"]["kind"] == "met"
    assert view["outcome"]["pair"] == [0, 1]


def test_legal_directives_match_step_rules(client):
    sid = make_session(client, fixture="l_shape", searchers=2, algorithm=2)
    for _ in range(40):
        view = client.get(f"/sessions/{sid}/view").json()
        legal = view["legal_directives"]
        if view["outcome"] is not None:
            assert legal == []
            break
        assert legal
        # every advertised directive is accepted; after applying one the
        # remaining list is refreshed
        d = legal[0]
        payload = {"searcher": d["searcher"], "action": d["action"]}
        if "fraction" in d:
            payload["fraction"] = d["fraction"]
        r = client.post(f"/sessions/{sid}/directives", json=payload)
        assert r.status_code == 200


def test_synchronous_round_keeps_symmetry(client):
    sid = make_session(client, fixture="star3", algorithm=1, searchers=3, frames="symmetric")
    for _ in range(6):
        view = client.get(f"/sessions/{sid}/view").json()
        phases = {s["phase"] for s in view["searchers"]}
        if phases == {"Idle"}:
            for s in range(3):
                client.post(f"/sessions/{sid}/directives", json={"searcher": s, "action": "Look", "dt": "0"})
            for s in range(3):
                client.post(f"/sessions/{sid}/directives", json={"searcher": s, "action": "FinishCompute", "dt": "0"})
            for s in range(3):
                client.post(f"/sessions/{sid}/directives", json={"searcher": s, "action": "StartMove", "dt": "0"})
            for s in range(3):
                client.post(f"/sessions/{sid}/directives", json={"searcher": s, "action": "AdvanceMove", "fraction": "1", "dt": "0"})
        view = client.get(f"/sessions/{sid}/view").json()
        assert view["rotation_symmetric"] is True
        assert view["outcome"] is None


def test_trace_download_replays(client):
    sid = make_session(client, fixture="rectangle", searchers=2)
    script = [
        {"searcher": 0, "action": "Look"},
        {"searcher": 1, "action": "Look"},
    ]
    for d in script:
        client.post(f"/sessions/{sid}/directives", json=d)
    r = client.get(f"/sessions/{sid}/trace")
    assert r.status_code == 200
    assert r.headers["X-Content-Digest"].startswith("sha256:")
    lines = [json.loads(line) for line in r.text.strip().splitlines()]
    assert lines[-1]["outcome"] in ("met", "budget_exhausted")
    # replay the downloaded directives in a fresh session: identical trace
    sid2 = make_session(client, fixture="rectangle", searchers=2)
    for rec in lines[:-1]:
        payload = {
            "searcher": rec["searcher"],
            "action": rec["action"],
            "dt": rec["dt"],
        }
        if rec["fraction"]:
            payload["fraction"] = rec["fraction"]
        client.post(f"/sessions/{sid2}/directives", json=payload)
    r2 = client.get(f"/sessions/{sid2}/trace")
    assert r2.text == r.text
    assert r2.headers["X-Content-Digest"] == r.headers["X-Content-Digest"]
