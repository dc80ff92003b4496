"""Black-box HTTP contract tests: endpoints, auth, and every error code."""

import base64

import pytest
from fastapi.testclient import TestClient

from flowdesk.core import PlatformCore
from flowdesk.server import build_app

from .contract import SWEEP_CODES, sweep_error_codes

AGENT_TOKEN = "test-agent-token"


@pytest.fixture
def env():
    clock = {"now": 1_700_000_000.0}
    core = PlatformCore(clock=lambda: clock["now"], token_ttl=3600)
    app = build_app(core, agent_token=AGENT_TOKEN)
    client = TestClient(app)
    yield client, core, clock
    core.close()


def auth(token):
    return {"Authorization": f"Bearer {token}"}


def make_user(client, username="alice", password="pw"):
    response = client.post("/api/v1/users", json={"username": username, "password": password})
    assert response.status_code == 200, response.text
    user_id = response.json()["node_id"]
    token = client.post(
        "/api/v1/auth/login", json={"username": username, "password": password}
    ).json()["token"]
    return user_id, token


def model_doc(name="edge-detector", version="1.0", **overrides):
    doc = {
        "content_type": "model",
        "name": name,
        "version": version,
        "uri": "https://example.org/m",
        "description": "",
        "tags": [],
        "public": False,
        "service": None,
        "parameters": [],
        "workflow_template": None,
    }
    doc.update(overrides)
    return doc


def simple_workflow(runner="mock", command=("log:x",)):
    return {
        "jobs": [{"job_id": "a", "runner_kind": runner, "command": list(command)}],
        "num_workers": 1,
        "worker_request": {"cpu": 1, "gpu": 0},
    }


def error_code(response):
    return response.json()["error"]["code"]


class TestAuth:
    def test_missing_token(self, env):
        client, _, _ = env
        response = client.get("/api/v1/jobs")
        assert response.status_code == 401
        assert error_code(response) == "BadCredentials"

    def test_login_flow_and_whoami(self, env):
        client, _, _ = env
        user_id, token = make_user(client)
        me = client.get("/api/v1/whoami", headers=auth(token))
        assert me.json()["node_id"] == user_id

    def test_bad_password(self, env):
        client, _, _ = env
        make_user(client)
        response = client.post("/api/v1/auth/login", json={"username": "alice", "password": "no"})
        assert response.status_code == 401
        assert error_code(response) == "BadCredentials"

    def test_expired_token(self, env):
        client, _, clock = env
        _, token = make_user(client)
        clock["now"] += 3601
        response = client.get("/api/v1/whoami", headers=auth(token))
        assert response.status_code == 401
        assert error_code(response) == "ExpiredToken"

    def test_agent_token_rejected_for_user_ops(self, env):
        client, _, _ = env
        response = client.post(
            "/api/v1/workflows", json=simple_workflow(), headers=auth(AGENT_TOKEN)
        )
        assert response.status_code == 403
        assert error_code(response) == "AccessDenied"

    def test_duplicate_username(self, env):
        client, _, _ = env
        make_user(client)
        response = client.post("/api/v1/users", json={"username": "alice", "password": "x"})
        assert response.status_code == 409
        assert error_code(response) == "DuplicateNode"

    def test_duplicate_username_leaves_no_orphan_node(self, env):
        client, core, _ = env
        make_user(client)
        nodes_before = set(core.access.nodes)
        client.post("/api/v1/users", json={"username": "alice", "password": "x"})
        assert set(core.access.nodes) == nodes_before


class TestWorkflowEndpoints:
    def test_submit_poll_execute_report_done(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        agent = auth(AGENT_TOKEN)

        wf = client.post("/api/v1/workflows", json=simple_workflow(), headers=headers).json()[
            "workflow_id"
        ]
        assert client.post(
            "/api/v1/hosts",
            json={"host_id": "h1", "cpu_capacity": 2, "gpu_capacity": 0},
            headers=agent,
        ).status_code == 200

        launches = client.post("/api/v1/hosts/h1/poll", headers=agent).json()["launches"]
        assert len(launches) == 1
        worker_id = launches[0]["worker_id"]

        action = client.get(f"/api/v1/workers/{worker_id}/next", headers=agent).json()
        assert action["kind"] == "job"
        job_id = action["job"]["job_id"]

        offset = client.post(
            f"/api/v1/jobs/{job_id}/logs",
            json={"chunk_b64": base64.b64encode(b"line 1\n").decode()},
            headers=agent,
        ).json()["offset"]
        assert offset == 7

        done = client.post(
            f"/api/v1/jobs/{job_id}/status",
            json={
                "state": "COMPLETED",
                "log_chunk_b64": base64.b64encode(b"line 2\n").decode(),
                "assets": [{"uri": "file:///out.bin", "kind": "trained-model"}],
            },
            headers=agent,
        )
        assert done.json()["state"] == "COMPLETED"
        assert len(done.json()["assets"]) == 1

        logs = client.get(f"/api/v1/jobs/{job_id}/logs", headers=headers)
        assert logs.content == b"line 1\nline 2\n"
        suffix = client.get(f"/api/v1/jobs/{job_id}/logs", params={"from": 7}, headers=headers)
        assert suffix.content == b"line 2\n"

        assert (
            client.get(f"/api/v1/workers/{worker_id}/next", headers=agent).json()["kind"]
            == "done"
        )
        assert client.post(f"/api/v1/workers/{worker_id}/done", headers=agent).status_code == 200

        workflow = client.get(f"/api/v1/workflows/{wf}", headers=headers).json()
        assert workflow["job_states"] == {"COMPLETED": 1}

        asset_id = done.json()["assets"][0]
        asset = client.get(f"/api/v1/assets/{asset_id}", headers=headers).json()
        assert asset["source_job_id"] == job_id

    def test_job_filters(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        wf = client.post("/api/v1/workflows", json=simple_workflow(), headers=headers).json()[
            "workflow_id"
        ]
        queued = client.get("/api/v1/jobs", params={"state": "QUEUED"}, headers=headers).json()
        assert len(queued["jobs"]) == 1
        running = client.get("/api/v1/jobs", params={"state": "RUNNING"}, headers=headers).json()
        assert running["jobs"] == []
        by_wf = client.get("/api/v1/jobs", params={"workflow": wf}, headers=headers).json()
        assert len(by_wf["jobs"]) == 1

    def test_cancel_endpoint(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        wf = client.post("/api/v1/workflows", json=simple_workflow(), headers=headers).json()[
            "workflow_id"
        ]
        assert client.post(f"/api/v1/workflows/{wf}/cancel", headers=headers).status_code == 200
        jobs = client.get("/api/v1/jobs", params={"workflow": wf}, headers=headers).json()["jobs"]
        assert jobs[0]["state"] == "CANCELED"


class TestRegistryEndpoints:
    def test_register_get_delete(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        content_id = client.post("/api/v1/contents", json=model_doc(), headers=headers).json()[
            "content_id"
        ]
        doc = client.get(f"/api/v1/contents/{content_id}", headers=headers).json()
        assert doc["name"] == "edge-detector"
        listing = client.get("/api/v1/contents", params={"type": "model"}, headers=headers).json()
        assert len(listing["contents"]) == 1
        assert client.delete(f"/api/v1/contents/{content_id}", headers=headers).status_code == 200
        assert (
            client.get(f"/api/v1/contents/{content_id}", headers=headers).status_code == 404
        )

    def test_strict_unknown_key(self, env):
        client, _, _ = env
        _, token = make_user(client)
        doc = model_doc()
        doc["extra_key"] = True
        response = client.post("/api/v1/contents", json=doc, headers=auth(token))
        assert response.status_code == 400
        assert error_code(response) == "SchemaViolation"
        assert "extra_key" in response.json()["error"]["message"]

    def test_strict_duplicate_key(self, env):
        client, _, _ = env
        _, token = make_user(client)
        raw = (
            b'{"content_type":"model","name":"x","name":"y","version":"1",'
            b'"uri":"https://example.org"}'
        )
        response = client.post(
            "/api/v1/contents",
            content=raw,
            headers={**auth(token), "Content-Type": "application/json"},
        )
        assert response.status_code == 400
        assert "name" in response.json()["error"]["message"]

    def test_search_endpoint(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        client.post("/api/v1/contents", json=model_doc(name="edge finder"), headers=headers)
        results = client.get(
            "/api/v1/contents/search", params={"q": "edge"}, headers=headers
        ).json()["results"]
        assert len(results) == 1 and results[0]["score"] == 1

    def test_launch_endpoint(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        app_doc = model_doc(
            name="viewer", content_type="app", service={"command": ["log:up"], "port": 8050}
        )
        content_id = client.post("/api/v1/contents", json=app_doc, headers=headers).json()[
            "content_id"
        ]
        wf = client.post(
            f"/api/v1/contents/{content_id}/launch",
            json={"runner_kind": "mock"},
            headers=headers,
        ).json()["workflow_id"]
        workflow = client.get(f"/api/v1/workflows/{wf}", headers=headers).json()
        assert len(workflow["job_ids"]) == 1

    def test_asset_endpoints(self, env):
        client, _, _ = env
        _, token = make_user(client)
        headers = auth(token)
        asset_id = client.post(
            "/api/v1/assets",
            json={"kind": "mask", "uri": "file:///m.png", "metadata": {"w": 4}},
            headers=headers,
        ).json()["asset_id"]
        assert client.get(f"/api/v1/assets/{asset_id}", headers=headers).json()["kind"] == "mask"
        assert len(client.get("/api/v1/assets", headers=headers).json()["assets"]) == 1
        assert client.delete(f"/api/v1/assets/{asset_id}", headers=headers).status_code == 200

    def test_private_content_access_denied(self, env):
        client, _, _ = env
        _, owner_token = make_user(client, "owner", "pw1")
        _, other_token = make_user(client, "other", "pw2")
        content_id = client.post(
            "/api/v1/contents", json=model_doc(), headers=auth(owner_token)
        ).json()["content_id"]
        response = client.get(f"/api/v1/contents/{content_id}", headers=auth(other_token))
        assert response.status_code == 403
        assert error_code(response) == "AccessDenied"


class TestGraphEndpoints:
    def test_team_membership_and_grant_flow(self, env):
        client, _, _ = env
        owner_id, owner_token = make_user(client, "owner", "pw1")
        member_id, member_token = make_user(client, "member", "pw2")
        team = client.post("/api/v1/teams", json={"name": "team"}, headers=auth(owner_token)).json()
        client.post(
            f"/api/v1/teams/{team['node_id']}/members",
            json={"user": member_id},
            headers=auth(owner_token),
        )
        content_id = client.post(
            "/api/v1/contents", json=model_doc(), headers=auth(owner_token)
        ).json()["content_id"]
        client.post(
            "/api/v1/grants",
            json={"subject": team["node_id"], "actions": ["read"], "resource": content_id},
            headers=auth(owner_token),
        )
        decision = client.get(
            "/api/v1/access",
            params={"user": member_id, "action": "read", "resource": content_id},
            headers=auth(owner_token),
        ).json()
        assert decision["allowed"] and len(decision["trace"][0]) == 2
        assert (
            client.get(f"/api/v1/contents/{content_id}", headers=auth(member_token)).status_code
            == 200
        )
        # revoke flips it back
        client.request(
            "DELETE",
            "/api/v1/grants",
            json={"subject": team["node_id"], "resource": content_id},
            headers=auth(owner_token),
        )
        denied = client.get(
            "/api/v1/access",
            params={"user": member_id, "action": "read", "resource": content_id},
            headers=auth(owner_token),
        ).json()
        assert not denied["allowed"] and denied["trace"] == []

    def test_remove_member_endpoint(self, env):
        client, _, _ = env
        _, owner_token = make_user(client, "owner", "pw1")
        member_id, _ = make_user(client, "member", "pw2")
        team = client.post("/api/v1/teams", json={"name": "t"}, headers=auth(owner_token)).json()
        client.post(
            f"/api/v1/teams/{team['node_id']}/members",
            json={"user": member_id},
            headers=auth(owner_token),
        )
        content_id = client.post(
            "/api/v1/contents", json=model_doc(), headers=auth(owner_token)
        ).json()["content_id"]
        client.post(
            "/api/v1/grants",
            json={"subject": team["node_id"], "actions": ["read"], "resource": content_id},
            headers=auth(owner_token),
        )
        assert client.delete(
            f"/api/v1/teams/{team['node_id']}/members/{member_id}",
            headers=auth(owner_token),
        ).status_code == 200
        decision = client.get(
            "/api/v1/access",
            params={"user": member_id, "action": "read", "resource": content_id},
            headers=auth(owner_token),
        ).json()
        assert not decision["allowed"]


class TestErrorCodeReachability:
    """Every documented error code must be reachable through the API."""

    def test_all_codes(self, env):
        client, _, _ = env
        observed = sweep_error_codes(client, AGENT_TOKEN)
        # ExpiredToken is exercised in TestAuth with the injected clock.
        assert observed == SWEEP_CODES
