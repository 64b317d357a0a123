import json
import time

import pytest
from fastapi.testclient import TestClient

from firmnet.service import create_app


SMALL = {
    "seed": 3,
    "epsilon": 10.0,
    "network": {"n": 12, "d": 3},
    "run": {"T": 300, "window": 150, "stride": 1},
}


@pytest.fixture
def client():
    app = create_app(workers=2, result_cap=4)
    with TestClient(app) as c:
        yield c


def wait_done(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        record = client.get(f"/api/v1/jobs/{job_id}").json()
        if record["status"] in ("done", "failed"):
            return record
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


class TestSimulateJob:
    def test_submit_poll_fetch(self, client):
        response = client.post("/api/v1/simulate", json=SMALL)
        assert response.status_code == 202
        record = response.json()
        assert record["status"] in ("queued", "running")
        final = wait_done(client, record["id"])
        assert final["status"] == "done"
        result = client.get(f"/api/v1/jobs/{record['id']}/result").json()
        assert result["classification"]["label"]
        assert result["config_fingerprint"] == record["config_fingerprint"]
        assert result["config"]["network"]["n"] == 12

    def test_malformed_json_400(self, client):
        response = client.post("/api/v1/simulate",
                               content=b"{not json",
                               headers={"content-type": "application/json"})
        assert response.status_code == 400

    def test_schema_violation_400_with_path(self, client):
        response = client.post("/api/v1/simulate",
                               json={"network": {"n": 10, "nope": 1}})
        assert response.status_code == 400
        assert "network.nope" in response.json()["error"]

    def test_unknown_job_404(self, client):
        assert client.get("/api/v1/jobs/deadbeef").status_code == 404
        assert client.get("/api/v1/jobs/deadbeef/result").status_code == 404

    def test_result_not_ready_409(self, client):
        config = dict(SMALL, run={"T": 4000, "window": 2000})
        record = client.post("/api/v1/simulate", json=config).json()
        response = client.get(f"/api/v1/jobs/{record['id']}/result")
        # Either it is astonishingly fast or we get the not-finished answer.
        assert response.status_code in (200, 409)
        wait_done(client, record["id"])

    def test_stride_downsamples(self, client):
        record = client.post("/api/v1/simulate", json=SMALL).json()
        wait_done(client, record["id"])
        full = client.get(f"/api/v1/jobs/{record['id']}/result").json()
        small = client.get(f"/api/v1/jobs/{record['id']}/result?stride=50").json()
        n_full = len(full["trajectory"]["series"]["t"])
        n_small = len(small["trajectory"]["series"]["t"])
        assert n_full == 301
        assert n_small <= 301 // 50 + 2
        assert small["trajectory"]["series"]["t"][-1] == 300


class TestSweepJob:
    def test_sweep_roundtrip_and_progress(self, client):
        config = dict(SMALL)
        config["run"] = {"T": 200, "window": 100, "seeds": [0]}
        config["sweep"] = {
            "axis1": {"name": "alpha", "values": [0.2, 0.5]},
            "axis2": {"name": "sigma", "values": [0.2, "inf"]},
        }
        record = client.post("/api/v1/sweep", json=config).json()
        final = wait_done(client, record["id"])
        assert final["status"] == "done"
        assert final["progress"] == 1.0
        result = client.get(f"/api/v1/jobs/{record['id']}/result").json()
        assert len(result["phase_diagram"]["labels"]) == 2
        assert len(result["phase_diagram"]["labels"][0]) == 2
        assert result["legend"] == ["competitive_equilibrium",
                                    "deflationary_equilibrium", "oscillations",
                                    "crises", "crash"]

    def test_sweep_requires_block(self, client):
        assert client.post("/api/v1/sweep", json=SMALL).status_code == 400

    def test_cancel(self, client):
        config = dict(SMALL)
        config["run"] = {"T": 5000, "window": 2500, "seeds": [0, 1, 2]}
        config["sweep"] = {
            "axis1": {"name": "alpha", "values": [0.2, 0.3, 0.4, 0.5, 0.6]},
            "axis2": {"name": "sigma", "values": [0.1, 0.3, 0.5, 0.7, 0.9]},
        }
        record = client.post("/api/v1/sweep", json=config).json()
        cancel = client.delete(f"/api/v1/jobs/{record['id']}")
        assert cancel.status_code == 200
        final = wait_done(client, record["id"])
        assert final["status"] == "failed"
        assert final["error"] == "cancelled"


class TestSyncEndpoints:
    def test_equilibrium_fast_path(self, client):
        config = json.dumps(SMALL)
        response = client.get("/api/v1/equilibrium", params={"config": config})
        assert response.status_code == 200
        body = response.json()
        assert body["realisable"] is True
        assert body["residuals"]["profit"] < 1e-10

    def test_equilibrium_not_realisable_422(self, client):
        config = json.dumps(dict(SMALL, epsilon=-1.0))
        response = client.get("/api/v1/equilibrium", params={"config": config})
        assert response.status_code == 422
        assert response.json()["eps"] == pytest.approx(-1.0, abs=1e-8)

    def test_spectrum_size(self, client):
        response = client.get("/api/v1/spectrum", params={"config": json.dumps(SMALL)})
        assert response.status_code == 200
        assert len(response.json()["eigenvalues"]) == 24

    def test_bad_config_400(self, client):
        response = client.get("/api/v1/equilibrium", params={"config": "{bad"})
        assert response.status_code == 400
