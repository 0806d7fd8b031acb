import pytest
from fastapi.testclient import TestClient

from expflow.api import dispatch
from expflow.service import app

GOLDEN = {"lengths": ["3/2-1/2*sqrt(5)", "3/2-1/2*sqrt(5)", "sqrt(5)-2"], "permutation": [3, 2, 1]}


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200 and r.json()["status"] == "ok"


@pytest.mark.parametrize("route,payload", [
    ("iem/check", {"iem": GOLDEN, "budget": 500}),
    ("iem/orbit", {"iem": GOLDEN, "x": "1/7", "steps": 5}),
    ("surface/admit", {"h": 2}),
    ("billiard/unfold", {"polygon": {"angles": ["1/2", "1/8", "3/8"]}}),
    ("suspend", {"iem": GOLDEN, "budget": 200}),
])
def test_routes_match_library(client, route, payload):
    r = client.post(f"/{route}", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body == dispatch(route, payload)
    assert body["schema"].startswith("expflow/") and body["schema"].endswith("/v1")


def test_golden_is_expansive(client):
    body = client.post("/iem/check", json={"iem": GOLDEN, "budget": 500}).json()
    assert body["expansive"] == "Yes" and body["decided"]


def test_torus_polygon_reason(client):
    body = client.post("/billiard/verdict", json={
        "polygon": {"angles": ["1/2"] * 4}, "direction": ["1", "sqrt(2)"]}).json()
    assert body["expansive"] == "No" and body["reason"] == "torus"


@pytest.mark.parametrize("payload", [
    {"iem": {"lengths": ["1/2", "1/3"], "permutation": [2, 1]}},     # lengths do not sum to 1
    {"iem": {"lengths": ["1/2", "1/2"], "permutation": [1, 1]}},
    {"iem": {"lengths": [], "permutation": []}},
])
def test_bad_iem_is_422(client, payload):
    assert client.post("/iem/check", json=payload).status_code == 422


def test_float_angles_rejected(client):
    r = client.post("/billiard/unfold", json={"polygon": {"angles": ["0.5", "0.25", "0.25"]}})
    assert r.status_code == 422
