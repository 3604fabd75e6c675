"""Teleop service endpoints and WebSocket message handling."""

import pytest
from fastapi.testclient import TestClient

from impactneedle.config import build_default
from impactneedle.service import create_app

CFG = build_default()


@pytest.fixture()
def client():
    app = create_app(CFG, tick_rate=60.0, real_time_factor=1.0)
    with TestClient(app) as c:
        yield c
        for sid in list(app.state.sessions):
            app.state.sessions.pop(sid).close()


def _open(client, scenario="teleop", **kw):
    r = client.post("/sessions", json={"scenario": scenario, **kw})
    assert r.status_code == 200
    return r.json()["id"]


def test_scenario_listing(client):
    r = client.get("/scenarios")
    assert r.status_code == 200
    names = r.json()["scenarios"]
    assert "teleop" in names and "running_suture" in names


def test_unknown_scenario_404(client):
    r = client.post("/sessions", json={"scenario": "no_such"})
    assert r.status_code == 404


def test_open_frame_close_cycle(client):
    sid = _open(client)
    f = client.get(f"/sessions/{sid}/frame").json()
    assert f["v"] == 1 and f["step"] == 0
    assert client.delete(f"/sessions/{sid}").status_code == 200
    assert client.get(f"/sessions/{sid}/frame").status_code == 410


def test_ws_command_and_step(client):
    sid = _open(client)
    with client.websocket_connect(f"/sessions/{sid}/ws") as ws:
        ws.send_json({"v": 1, "type": "command", "id": 1,
                      "kind": "set_pull", "payload": {"pull": 0.6}})
        ack = ws.receive_json()
        assert ack["type"] == "ack" and ack["id"] == 1
        ws.send_json({"v": 1, "type": "control", "id": 2,
                      "action": "step", "steps": 500})
        ack = ws.receive_json()
        assert ack["type"] == "ack" and ack["step"] == 500
    f = client.get(f"/sessions/{sid}/frame").json()
    assert f["step"] == 500
    assert f["velocity"][0] > 0.0   # the pull moved the needle


def test_ws_rejects_bad_messages(client):
    sid = _open(client)
    with client.websocket_connect(f"/sessions/{sid}/ws") as ws:
        ws.send_json({"v": 99, "type": "command", "id": 1,
                      "kind": "set_pull", "payload": {"pull": 1}})
        assert ws.receive_json()["type"] == "error"
        ws.send_json({"v": 1, "type": "command", "id": 2,
                      "kind": "set_direction",
                      "payload": {"direction": [3.0, 4.0]}})
        err = ws.receive_json()
        assert err["type"] == "error" and "unit" in err["message"]
        ws.send_json({"v": 1, "type": "bogus", "id": 3})
        assert ws.receive_json()["type"] == "error"
        ws.send_json({"v": 1, "type": "subscribe", "id": 4, "rate": 500.0})
        assert ws.receive_json()["type"] == "error"


def test_ws_subscribe_streams_frames(client):
    sid = _open(client)
    with client.websocket_connect(f"/sessions/{sid}/ws") as ws:
        ws.send_json({"v": 1, "type": "subscribe", "id": 1, "rate": 60.0})
        assert ws.receive_json()["type"] == "ack"
        ws.send_json({"v": 1, "type": "control", "id": 2, "action": "start"})
        seqs = []
        while len(seqs) < 3:
            msg = ws.receive_json()
            if msg["type"] == "frame":
                seqs.append(msg["seq"])
        assert seqs == sorted(seqs)
        assert all(m2 > m1 for m1, m2 in zip(seqs, seqs[1:]))
        ws.send_json({"v": 1, "type": "control", "id": 3, "action": "pause"})


def test_ws_on_dead_session(client):
    sid = _open(client)
    client.delete(f"/sessions/{sid}")
    with client.websocket_connect(f"/sessions/{sid}/ws") as ws:
        assert ws.receive_json()["type"] == "closed"


def test_log_endpoint_round_trips(client):
    sid = _open(client)
    with client.websocket_connect(f"/sessions/{sid}/ws") as ws:
        ws.send_json({"v": 1, "type": "command", "id": 1,
                      "kind": "hammer_on", "payload": {}})
        ws.receive_json()
        ws.send_json({"v": 1, "type": "control", "id": 2,
                      "action": "step", "steps": 200})
        ws.receive_json()
    log = client.get(f"/sessions/{sid}/log").json()
    assert log["v"] == 1 and log["scenario"] == "teleop"
    assert [c["kind"] for c in log["commands"]] == ["hammer_on"]
    assert log["steps"] == 200
