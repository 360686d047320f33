"""Wire protocol: in-process handler behavior and WebSocket transport."""

import json
import time

import numpy as np
import pytest

from isbst.fbd import execute_batch
from isbst.protocol import ProtocolService
from isbst.server import create_app


def small_config_dict(version_id=1, seed=3):
    return {
        "version_id": version_id,
        "de": {"pop_size": 8, "trace_len": 20, "seed": seed},
        "n_steps": 4,
        "max_events": 10,
    }


@pytest.fixture()
def service(shipped_study, tmp_path):
    svc = ProtocolService(shipped_study, export_dir=tmp_path)
    yield svc
    svc.shutdown()


def start_session(service, **kw):
    resp = service.handle({"type": "start", "seq": 1, "config": small_config_dict(**kw)})
    assert resp["ok"], resp
    return resp["session_id"], resp["event"]


class TestHandler:
    def test_list_versions(self, service):
        resp = service.handle({"type": "list_versions", "seq": 1})
        assert resp["ok"]
        assert len(resp["versions"]) == 16
        assert resp["versions"][0] == {"version_id": 1, "label": "v1"}

    def test_start_returns_event_zero(self, service):
        sid, event = start_session(service)
        assert event["index"] == 0
        assert len(event["current"]) == 8
        assert event["counters"] == {"iterations": 0, "evaluations": 8}

    def test_unknown_version_rejected(self, service):
        resp = service.handle({"type": "start", "seq": 1, "config": small_config_dict(version_id=99)})
        assert not resp["ok"] and "unknown version" in resp["error"]

    def test_unknown_session_rejected(self, service):
        resp = service.handle({"type": "status", "seq": 1, "session_id": "nope"})
        assert not resp["ok"]

    def test_set_weights_echoed_in_next_event(self, service):
        sid, _ = start_session(service)
        resp = service.handle({
            "type": "set_weights", "seq": 2, "session_id": sid,
            "weights": {"max.derivative": 2.5},
        })
        assert resp["ok"] and resp["weights"]["max.derivative"] == 2.5
        resp = service.handle({"type": "run_segment", "seq": 3, "session_id": sid, "wait": True})
        assert resp["ok"]
        assert resp["event"]["weights"]["max.derivative"] == 2.5
        assert resp["event"]["weights"]["amplitude"] == 0.0

    def test_invalid_weights_rejected(self, service):
        sid, _ = start_session(service)
        resp = service.handle({
            "type": "set_weights", "seq": 2, "session_id": sid, "weights": {"nope": 1},
        })
        assert not resp["ok"]

    def test_run_segment_pushes_event(self, service):
        pushes = []
        resp = service.handle(
            {"type": "start", "seq": 1, "config": small_config_dict()}, push=pushes.append
        )
        sid = resp["session_id"]
        resp = service.handle({"type": "run_segment", "seq": 2, "session_id": sid})
        assert resp["ok"] and resp["running"]
        deadline = time.time() + 10
        while not pushes and time.time() < deadline:
            time.sleep(0.01)
        assert pushes and pushes[0]["type"] == "event"
        assert pushes[0]["session_id"] == sid
        assert pushes[0]["push_seq"] == 1
        assert pushes[0]["event"]["index"] == 1

    def test_mutating_command_rejected_while_running(self, service, shipped_study):
        # long segment so the rejection window is observable
        cfg = {"version_id": 1, "de": {"pop_size": 30, "trace_len": 50, "seed": 1},
               "n_steps": 60, "max_events": 5}
        resp = service.handle({"type": "start", "seq": 1, "config": cfg})
        sid = resp["session_id"]
        service.handle({"type": "run_segment", "seq": 2, "session_id": sid})
        status = service.handle({"type": "status", "seq": 3, "session_id": sid})
        assert status["ok"]  # read-only allowed
        saw_rejection = False
        for i in range(200):
            r = service.handle({"type": "set_weights", "seq": 10 + i, "session_id": sid,
                                "weights": {"amplitude": 1.0}})
            if not r["ok"]:
                saw_rejection = True
                break
            time.sleep(0.001)
        assert saw_rejection

    def test_candidate_detail_and_export(self, service, shipped_study, tmp_path):
        sid, event = start_session(service)
        cid = event["current"][0]["cid"]
        detail = service.handle({"type": "candidate_detail", "seq": 2, "session_id": sid, "cid": cid})
        assert detail["ok"]
        assert len(detail["detail"]["inputs"]["Input_6"]) == 20

        resp = service.handle({"type": "export_candidate", "seq": 3, "session_id": sid, "cid": cid})
        assert resp["ok"]
        rows = resp["csv"].strip().splitlines()
        assert len(rows) == 21
        body = [r.split(",") for r in rows[1:]]
        inputs = np.array([[int(r[i]) for r in body] for i in range(7)], dtype=np.int64)
        outputs = [[int(r[7 + j]) for r in body] for j in range(3)]
        again = execute_batch(shipped_study[0].diagram, inputs[None])[0]
        assert again.tolist() == outputs
        meta = json.loads(resp["sidecar"])
        assert meta["version_id"] == 1 and meta["seed"] == 3

    def test_stop_returns_log(self, service):
        sid, _ = start_session(service)
        service.handle({"type": "run_segment", "seq": 2, "session_id": sid, "wait": True})
        resp = service.handle({"type": "stop", "seq": 3, "session_id": sid})
        assert resp["ok"]
        assert len(resp["log"]["events"]) == 2

    def test_blinded_labels(self, shipped_study):
        svc = ProtocolService(shipped_study[:2], labels={1: "1_v1", 2: "2_v4"})
        try:
            resp = svc.handle({"type": "list_versions", "seq": 1})
            assert resp["versions"][0]["label"] == "1_v1"
            assert resp["versions"][1]["label"] == "2_v4"
        finally:
            svc.shutdown()


class TestWebSocket:
    @pytest.fixture()
    def client(self, shipped_study, tmp_path):
        from starlette.testclient import TestClient

        app = create_app(shipped_study, export_dir=tmp_path)
        with TestClient(app) as client:
            yield client
        app.state.service.shutdown()

    def test_round_trip_over_websocket(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "list_versions", "seq": 1}))
            resp = json.loads(ws.receive_text())
            assert resp["ok"] and len(resp["versions"]) == 16

            ws.send_text(json.dumps({"type": "start", "seq": 2, "config": small_config_dict()}))
            resp = json.loads(ws.receive_text())
            assert resp["ok"]
            sid = resp["session_id"]

            ws.send_text(json.dumps({
                "type": "set_weights", "seq": 3, "session_id": sid,
                "weights": {"max.increase": 1.0},
            }))
            assert json.loads(ws.receive_text())["ok"]

            ws.send_text(json.dumps({"type": "run_segment", "seq": 4, "session_id": sid}))
            ack = json.loads(ws.receive_text())
            assert ack["ok"] and ack["running"]
            pushed = json.loads(ws.receive_text())  # server push on completion
            assert pushed["type"] == "event"
            assert pushed["event"]["index"] == 1
            assert pushed["event"]["weights"]["max.increase"] == 1.0

    def test_sequence_numbers_must_increase(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "list_versions", "seq": 5}))
            assert json.loads(ws.receive_text())["ok"]
            ws.send_text(json.dumps({"type": "list_versions", "seq": 5}))
            resp = json.loads(ws.receive_text())
            assert not resp["ok"] and "sequence" in resp["error"]
            ws.send_text(json.dumps({"type": "list_versions", "seq": 6}))
            assert json.loads(ws.receive_text())["ok"]
