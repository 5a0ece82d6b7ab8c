"""Tests for the HTTP service."""

import pytest
from fastapi.testclient import TestClient

from main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def matrix(rows):
    return {"dim": len(rows), "rows": [[[float(x), 0.0] for x in row] for row in rows]}


def test_health(client):
    response = client.get("/api/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "healthy"
    assert body["fixtures"] == "reachable"
    assert "X-Process-Time" in response.headers


def test_detailed_health(client):
    body = client.get("/api/v1/health/detailed").json()
    assert body["fixtures"]["count"] >= 10
    assert body["optimizer"]["starts"] >= 1


def test_root(client):
    body = client.get("/api").json()
    assert body["status"] == "running"
    assert body["routes"] == ["/api/v1", "/api/v1/witness"]


def test_paper_witness(client):
    body = client.get("/api/v1/witness/paper").json()
    assert body["B_L"] == 0.125
    assert body["B_U"] == 0.375


def test_certify_ideal(client):
    response = client.post("/api/v1/witness/certify", json={"state": "psi_minus", "r": 0.0})
    assert response.status_code == 200
    assert response.json()["verdict_raw"] == "entangled_above"


def test_certify_with_explicit_parameters(client):
    detector = matrix([[0.9, 0, 0, 0], [0, 0.02, 0, 0], [0, 0, 0.02, 0], [0, 0, 0, 0.01]])
    response = client.post("/api/v1/witness/certify", json={
        "state": "phi_plus", "r": 0.2, "detector": detector, "mitigate": True, "epsilon": 0.05, "eta": 0.3,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["p0_eta"] == pytest.approx((body["p_e"] / 0.95 - 0.05 * 0.3) / 0.95)


def test_certify_rejects_eta_without_epsilon(client):
    response = client.post("/api/v1/witness/certify", json={"state": "phi_plus", "r": 0.2, "eta": 0.3})
    assert response.status_code == 422


def test_certify_epsilon_alone_centres_eta_on_residual(client):
    body = client.post("/api/v1/witness/certify", json={
        "state": "psi_minus", "r": 0.0, "mitigate": True, "epsilon": 0.1,
    }).json()
    # ideal detector: P = |00><00|, so q_c = 1/2
    assert body["p0_eta"] == pytest.approx((body["p_e"] - 0.1 * 0.5) / 0.9)

    detector = matrix([[0.9, 0, 0, 0], [0, 0.02, 0, 0], [0, 0, 0.02, 0], [0, 0, 0, 0.01]])
    body = client.post("/api/v1/witness/certify", json={
        "state": "phi_plus", "r": 0.2, "detector": detector, "mitigate": True, "epsilon": 0.06,
    }).json()
    q_c = ((0.9 / 0.95 - 0.94) / 0.06 + 0.02 / 0.95 / 0.06) / 2
    assert body["p0_eta"] == pytest.approx((body["p_e"] / 0.95 - 0.06 * q_c) / 0.94)


def test_certify_rejects_out_of_range_r(client):
    response = client.post("/api/v1/witness/certify", json={"state": "phi_plus", "r": 1.2})
    assert response.status_code == 422
    assert "detail" in response.json()


def test_decompose(client):
    response = client.post("/api/v1/decompose", json={
        "element": matrix([[0.95, 0], [0, 0.08]]), "outcome": "0", "starts": 2, "seed": 1,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "decomposition"
    assert 0.0 < body["epsilon"] < 1.0
    assert body["trace_pi"] == pytest.approx(1.03)


def test_decompose_domain_error_is_422(client):
    response = client.post("/api/v1/decompose", json={
        "element": {"dim": 2, "rows": [[[0.5, 0.0], [0.3, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}, "outcome": "0",
    })
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "numerical"


def test_decompose_dimension_mismatch(client):
    response = client.post("/api/v1/decompose", json={"element": matrix([[1, 0], [0, 0]]), "outcome": "00"})
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "numerical"


@pytest.mark.parametrize(
    "probability, expected",
    [(0.45, "entangled_above"), (0.05, "entangled_below"), (0.2, "inconclusive")],
)
def test_verdict_with_default_window(client, probability, expected):
    response = client.post("/api/v1/witness/verdict", json={"probability": probability})
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"] == expected
    assert body["window"] == [0.125, 0.375]


def test_verdict_with_mitigated_window(client):
    body = client.post("/api/v1/witness/verdict", json={"probability": 0.39, "window": [0.121151, 0.406782]}).json()
    assert body["verdict"] == "inconclusive"
    assert body["margin"] == pytest.approx(0.406782 - 0.39)


def test_verdict_rejects_reversed_window(client):
    response = client.post("/api/v1/witness/verdict", json={"probability": 0.2, "window": [0.4, 0.1]})
    assert response.status_code == 422


@pytest.mark.parametrize("probability, expected", [(-0.05, "entangled_below"), (1.08, "entangled_above")])
def test_verdict_accepts_unclamped_probabilities(client, probability, expected):
    response = client.post("/api/v1/witness/verdict", json={"probability": probability})
    assert response.status_code == 200
    assert response.json()["verdict"] == expected


def test_mitigate_stays_within_bound(client):
    response = client.post("/api/v1/mitigate", json={
        "element": matrix([[0.95, 0], [0, 0.08]]), "outcome": "0",
        "state": matrix([[0.7, 0], [0, 0.3]]), "starts": 2, "seed": 1,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "mitigation"
    assert body["seed"] == 1
    assert body["true_p0"] == pytest.approx(0.7)
    assert body["error_rate_raw"] == pytest.approx(0.05)
    assert abs(body["p0_eta"] - body["true_p0"]) <= body["bound"] + 1e-9


def test_mitigate_dimension_mismatch(client):
    response = client.post("/api/v1/mitigate", json={
        "element": matrix([[0.95, 0], [0, 0.08]]), "outcome": "0",
        "state": matrix([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]), "starts": 1,
    })
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "numerical"
