"""HTTP service endpoints and their error mapping."""

import pytest
from fastapi.testclient import TestClient

from resilmon.flockgen import DisturbanceSpec, FlockParams, simulate
from resilmon.oracle import golden_recovery_signal
from resilmon.resilience import resv
from resilmon.formula import parse_srs
from resilmon.service import (
    MonitorRequest,
    ParetoRequest,
    create_app,
    run_monitor,
    run_pareto,
)
from resilmon.trace import load_trace, to_csv

GOLDEN_CSV = to_csv(golden_recovery_signal())
GOLDEN_FORMULA = "G[0,20] R[1,2](x >= 0)"


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert "version" in body


class TestMonitorEndpoint:
    def test_golden_run(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": GOLDEN_FORMULA,
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["verdict"] == "Boundary"
        assert body["formula"] == GOLDEN_FORMULA
        assert body["time"] == 0
        got = {(p["rec"], p["dur"]) for p in body["pairs"]}
        assert got == {(-1, 2), (1, -1), (-2, 3)}
        assert {p["atom_time"] for p in body["pairs"]} == {0, 5, 13}
        assert all(p["atom"] == "R[1,2](x >= 0)" for p in body["pairs"])
        assert body["extended_from"] is None
        assert body["runtime_seconds"] > 0

    def test_pairs_mirror_engine_resv(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": GOLDEN_FORMULA,
        })
        got = {(p["rec"], p["dur"]) for p in resp.json()["pairs"]}
        engine = resv(parse_srs(GOLDEN_FORMULA), golden_recovery_signal(), 0)
        assert engine == got

    def test_seconds_scaling(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": GOLDEN_FORMULA, "dt": 0.05,
        })
        pair = resp.json()["pairs"][0]
        assert pair["rec_seconds"] == pytest.approx(pair["rec"] * 0.05)
        assert pair["atom_time_seconds"] == pytest.approx(pair["atom_time"] * 0.05)

    def test_seconds_mode_formula(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": "G[0,10] R[0.5,1](x >= 0)",
            "dt": 0.5, "seconds": True,
        })
        assert resp.status_code == 200
        assert resp.json()["formula"] == "G[0,20] R[1,2](x >= 0)"

    def test_extension_warning_is_reported(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": "t,x\n0,1\n1,1\n", "formula": "G[0,5] R[1,1](x >= 0)",
        })
        body = resp.json()
        assert body["extended_from"] == 1
        assert any("terminal sample" in w for w in body["warnings"])

    def test_parse_error(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": "G[0,20 R",
        })
        assert resp.status_code == 400
        body = resp.json()
        assert body["kind"] == "parse"
        assert body["line"] == 1 and body["col"] == 8

    def test_trace_error(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": "t,x\n0,abc\n1,2\n", "formula": "R[1,1](x >= 0)",
        })
        assert resp.status_code == 400
        assert resp.json()["kind"] == "trace"

    def test_evaluation_error(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": "t,x\n0,1\n1,1\n", "formula": "G[0,9] R[1,1](x >= 0)",
            "auto_extend": False,
        })
        assert resp.status_code == 400
        assert resp.json()["kind"] == "evaluation"

    def test_request_validation(self, client):
        resp = client.post("/monitor", json={"formula": "R[1,1](x >= 0)"})
        assert resp.status_code == 422

    def test_non_integral_time(self, client):
        resp = client.post("/monitor", json={
            "trace_csv": GOLDEN_CSV, "formula": GOLDEN_FORMULA, "time": 0.5,
        })
        assert resp.status_code == 400
        assert resp.json()["kind"] == "parse"


class TestParetoEndpoint:
    def test_golden_front(self, client):
        resp = client.post("/pareto", json={
            "trace_csv": GOLDEN_CSV, "atom": "R[1,2](x >= 0)",
            "window": [0, 20],
        })
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["rows"]) == 21
        flagged = [r for r in body["rows"] if r["on_front"]]
        assert [(r["time"], r["rec"], r["dur"]) for r in flagged] == [
            (0, -1, 2), (5, 1, -1), (13, -2, 3),
        ]

    def test_front_rows_mutually_non_dominated(self, client):
        from resilmon.resilience import DomRelation, ResPair, compare

        resp = client.post("/pareto", json={
            "trace_csv": GOLDEN_CSV, "atom": "R[1,2](x >= 0)",
            "window": [0, 20],
        })
        front = [ResPair(r["rec"], r["dur"])
                 for r in resp.json()["rows"] if r["on_front"]]
        for a in front:
            for b in front:
                assert compare(a, b) is DomRelation.NON_DOMINATED

    def test_width_zero_window(self, client):
        resp = client.post("/pareto", json={
            "trace_csv": GOLDEN_CSV, "atom": "R[1,2](x >= 0)", "window": [4, 4],
        })
        rows = resp.json()["rows"]
        assert len(rows) == 1 and rows[0]["on_front"]

    def test_composite_rejected(self, client):
        resp = client.post("/pareto", json={
            "trace_csv": GOLDEN_CSV, "atom": GOLDEN_FORMULA, "window": [0, 5],
        })
        assert resp.status_code == 400
        assert resp.json()["kind"] == "parse"
        assert "bare resiliency atom" in resp.json()["message"]


class TestVerifyEndpoint:
    def test_small_suite(self, client):
        resp = client.post("/verify", json={"cases": 25, "seed": 0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["ok"] is True
        assert body["cases"] == 25
        assert body["violations"] == []
        assert sum(body["histogram"].values()) == 25
        assert len(body["golden"]) == 2

    def test_case_count_validated(self, client):
        assert client.post("/verify", json={"cases": 0}).status_code == 422


class TestFlockEndpoint:
    def test_trace_round_trips_to_simulate(self, client):
        resp = client.post("/flock", json={
            "duration_seconds": 3.0, "seed": 4,
            "disturbance": {"affected": 0, "windows": []},
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["rows"] == 31
        assert body["channels"] == ["J", "CC"]
        got = load_trace(body["trace_csv"].encode(), dt=body["dt"])
        want = simulate(
            FlockParams(seed=4, disturbance=DisturbanceSpec(affected=0,
                                                            windows=())),
            3.0,
        )
        assert got == want

    def test_value_error_mapping(self, client):
        resp = client.post("/flock", json={"n": 1, "duration_seconds": 1.0})
        assert resp.status_code == 400
        assert resp.json()["kind"] == "value"


class TestHandlersDirectly:
    def test_run_monitor_without_http(self):
        report = run_monitor(MonitorRequest(
            trace_csv=GOLDEN_CSV, formula=GOLDEN_FORMULA,
        ))
        assert report.verdict == "Boundary"
        assert len(report.pairs) == 3

    def test_run_pareto_earliest_time_flagging(self):
        # duplicated front pairs at later times stay unflagged
        report = run_pareto(ParetoRequest(
            trace_csv=GOLDEN_CSV, atom="R[1,2](x >= 0)", window=(0, 20),
        ))
        pair_times = [r.time for r in report.rows
                      if (r.rec, r.dur) == (1, -1)]
        flags = {r.time: r.on_front for r in report.rows}
        assert len(pair_times) > 1
        assert flags[pair_times[0]]
        assert not any(flags[t] for t in pair_times[1:])
