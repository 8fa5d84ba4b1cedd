import asyncio

import httpx
import pytest

from pecking.service import app, create_app


def call(method, path, **kwargs):
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://t") as client:
            return await getattr(client, method)(path, **kwargs)
    return asyncio.run(go())


def test_health():
    r = call("get", "/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_graph_build():
    r = call("post", "/graph/build", json={"config": {
        "graph.family": "cycle", "graph.n": 4}})
    assert r.status_code == 200
    body = r.json()
    assert body == {"graph_id": "cycle-4", "n": 4, "edge_count": 4,
                    "edge_list": "0 1\n0 3\n1 2\n2 3\n"}


def test_graph_build_bad_config_is_422():
    r = call("post", "/graph/build", json={"config": {
        "graph.family": "moebius", "graph.n": 4}})
    assert r.status_code == 422
    assert "family" in r.json()["detail"]


def test_stability_endpoint():
    r = call("post", "/stability", json={"config": {
        "graph.family": "star", "graph.n": 100, "eta": 1.0, "F": 1.0,
        "sweep.mu": [0.2, 0.4]}})
    assert r.status_code == 200
    body = r.json()
    assert len(body["rows"]) == 2
    assert body["csv"].startswith("graph_id,")
    assert body["rows"][0]["classification"] == "unstable"


def test_sweep_endpoint_and_unknown_key():
    cfg = {"model": "bonabeau_full", "graph.family": "star", "graph.n": 10,
           "eta": 1.0, "F": 1.0, "mu": 0.5, "steps": 2000, "seed": 1,
           "sample_stride": 100}
    r = call("post", "/sweep", json={"config": cfg})
    assert r.status_code == 200
    assert len(r.json()["rows"]) == 1
    r = call("post", "/sweep", json={"config": {**cfg, "stepz": 1}})
    assert r.status_code == 422
    assert "unknown config key 'stepz'" in r.json()["detail"]


def test_competing_endpoint():
    r = call("post", "/competing", json={"config": {
        "model": "competing", "graph.family": "path", "graph.n": 6,
        "ell": 1, "eta": 1.0, "replicates": 3, "seed": 4}})
    assert r.status_code == 200
    assert r.json()["summary"]["all_terminal"] is True


def test_meanfield_endpoint():
    r = call("post", "/meanfield", json={"config": {
        "model": "bonabeau_full", "graph.family": "path", "graph.n": 5,
        "eta": 1.0, "F": 1.5, "mu": 0.5}})
    assert r.status_code == 200
    assert r.json()["extras"]["identity_max_abs_err"] < 1e-12


def test_verify_endpoint():
    r = call("post", "/verify", json={"config": {
        "graph.family": "path", "graph.n": 4, "seed": 6,
        "verify.states": 20, "verify.graphs": 2, "verify.samples": 10000}})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["report"].rstrip().endswith("overall: PASS")


def test_plot_endpoint_and_error():
    rows = [{"mu": 0.2, "F": 1.0, "mean_sigma": 0.5},
            {"mu": 0.4, "F": 1.0, "mean_sigma": 0.1}]
    r = call("post", "/plot", json={"rows": rows})
    assert r.status_code == 200
    assert r.json()["svg"].startswith("<?xml")
    r = call("post", "/plot", json={"rows": [{"mu": 0.2, "F": 1.0,
                                              "mean_sigma": "nan"}]})
    assert r.status_code == 422


def test_request_schema_violation_is_422():
    r = call("post", "/sweep", json={"not_config": 1})
    assert r.status_code == 422


def test_create_app_returns_fresh_instance():
    assert create_app() is not app
