import time

import pytest
from fastapi.testclient import TestClient

import server


@pytest.fixture
def client(workdir, monkeypatch):
    for key, value in {"status": "idle", "experiments_completed": [], "failed_checks": [],
                       "errors": [], "exit_code": None, "result_files": {}}.items():
        monkeypatch.setitem(server._sweep_state, key, value)
    with TestClient(server.app) as c:
        yield c


def _wait(client, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get("/api/status").json()
        if status["status"] != "running":
            return status
        time.sleep(0.2)
    raise AssertionError("sweep did not finish")


def test_health(client):
    body = client.get("/api/health").json()
    assert body["status"] == "ok"
    assert body["sweep"] == "idle"


def test_status_and_experiments_when_idle(client):
    assert client.get("/api/status").json()["status"] == "idle"
    body = client.get("/api/experiments").json()
    assert "series_approx" in body["available_experiments"]
    assert body["completed"] == []


def test_missing_outputs_are_404(client):
    assert client.get("/api/report").status_code == 404
    assert client.get("/api/results/theta_scan").status_code == 404
    assert client.get("/api/results/nonsense").status_code == 404
    assert "No report generated yet" in client.get("/").text


def test_invalid_override_is_422(client):
    response = client.post("/api/run", json={
        "experiments": ["discontinuity"], "overrides": {"discontinuity": {"s_list": [0.5]}}})
    assert response.status_code == 422
    assert client.post("/api/run", json={"experiments": ["nope"]}).status_code == 422


def test_second_sweep_is_409(client, monkeypatch):
    monkeypatch.setitem(server._sweep_state, "status", "running")
    response = client.post("/api/run", json={"experiments": ["theta_scan"]})
    assert response.status_code == 409


def test_sweep_round_trip(client):
    response = client.post("/api/run", json={
        "experiments": ["solver_validate"],
        "overrides": {"solver_validate": {"amplitude": 0.0, "solver": {"dt": 0.05}}},
    })
    assert response.status_code == 200
    assert response.json()["status"] == "started"

    status = _wait(client)
    assert status["status"] == "completed"
    assert status["exit_code"] == 0
    assert status["experiments_completed"] == ["solver_validate"]

    results = client.get("/api/results/solver_validate").json()
    assert results["config"]["experiment"] == "solver_validate"
    assert all(check["passed"] for check in results["checks"])
    report = client.get("/api/report")
    assert report.status_code == 200
    assert "Solver Validation" in report.text


def test_results_follow_an_output_dir_override(client, workdir):
    custom = str(workdir / "custom" / "solver")
    response = client.post("/api/run", json={
        "experiments": ["solver_validate"],
        "overrides": {"solver_validate": {"amplitude": 0.0, "output_dir": custom, "solver": {"dt": 0.05}}},
    })
    assert response.status_code == 200
    assert _wait(client)["exit_code"] == 0

    results = client.get("/api/results/solver_validate")
    assert results.status_code == 200
    assert results.json()["config"]["output_dir"] == custom
    assert (workdir / "custom" / "solver" / "results.json").exists()
    assert not (workdir / "outputs" / "solver_validate" / "results.json").exists()
