"""API clients: HTTP for real deployments, in-process for tests and embedding.

Both expose the same duck-typed surface with the same JSON-shaped dicts, so
workers, launchers, the CLI, and the demo driver run unchanged against
either. The HTTP client rebuilds typed platform errors from the wire code.
"""

from __future__ import annotations

import base64

import httpx

from .core import JobState, PlatformCore
from .errors import DuplicateNode, PlatformError, error_for_code
from .scheduling import HostState


def host_dict(host: HostState) -> dict:
    return {
        "host_id": host.host_id,
        "cpu_capacity": host.cpu_capacity,
        "gpu_capacity": host.gpu_capacity,
        "cpu_available": host.cpu_available,
        "gpu_available": host.gpu_available,
    }


def workflow_dict(core: PlatformCore, workflow_id: str) -> dict:
    workflow = core.get_workflow(workflow_id)
    d = workflow.to_dict()
    counts: dict[str, int] = {}
    for job_id in workflow.job_ids:
        state = core.jobs[job_id].state.value
        counts[state] = counts.get(state, 0) + 1
    d["job_states"] = counts
    return d


class InProcessApi:
    """Direct adapter over a PlatformCore, speaking wire-shaped dicts."""

    def __init__(self, core: PlatformCore, principal: str | None = None):
        self.core = core
        self.principal = principal

    def as_user(self, principal: str) -> "InProcessApi":
        return InProcessApi(self.core, principal)

    # auth (login switches which user this client acts as)

    def create_user(self, username: str, password: str, attributes: dict | None = None) -> dict:
        attributes = dict(attributes or {})
        attributes.setdefault("username", username)
        with self.core.lock:
            if self.core.access.has_username(username):
                raise DuplicateNode(f"username already registered: {username}")
            node = self.core.access.create_user(attributes)
            self.core.access.set_credentials(node.node_id, username, password)
        return node.to_dict()

    def login(self, username: str, password: str) -> dict:
        with self.core.lock:
            token = self.core.access.authenticate(username, password)
            user = self.core.access.resolve_token(token)
        self.principal = user.node_id
        return {"token": token, "user": user.to_dict()}

    def whoami(self) -> dict:
        return self.core.access.nodes[self.principal].to_dict()

    def create_team(self, name: str, attributes: dict | None = None) -> dict:
        attributes = dict(attributes or {})
        if name:
            attributes.setdefault("name", name)
        with self.core.lock:
            return self.core.access.create_team(self.principal, attributes).to_dict()

    def add_member(self, team_id: str, user_id: str) -> dict:
        with self.core.lock:
            return self.core.access.add_member(team_id, user_id, self.principal).to_dict()

    def remove_member(self, team_id: str, user_id: str) -> None:
        with self.core.lock:
            self.core.access.remove_member(team_id, user_id, self.principal)

    def grant(self, subject: str, actions: list, resource: str) -> dict:
        with self.core.lock:
            return self.core.access.grant(self.principal, subject, actions, resource).to_dict()

    def revoke(self, subject: str, resource: str) -> None:
        with self.core.lock:
            self.core.access.revoke(self.principal, subject, resource)

    def check_access(self, user: str, action: str, resource: str) -> dict:
        return self.core.access.check_access(user, action, resource).to_dict()

    # worker / launcher protocol

    def register_host(self, host_id: str, cpu_capacity: int, gpu_capacity: int) -> dict:
        return host_dict(self.core.register_host(host_id, cpu_capacity, gpu_capacity))

    def poll_allocations(self, host_id: str) -> list:
        return self.core.poll_allocations(host_id)

    def next_ready_job(self, worker_id: str) -> dict:
        action = self.core.next_ready_job(worker_id)
        return {
            "kind": action.kind,
            "job": self.core.job_dict(action.job) if action.job else None,
        }

    def report_job_status(self, job_id: str, state: str, log_chunk: bytes, assets: list) -> dict:
        job = self.core.report_job_status(job_id, JobState(state), log_chunk, assets)
        return self.core.job_dict(job)

    def append_log(self, job_id: str, chunk: bytes) -> int:
        return self.core.append_log(job_id, chunk)

    def worker_done(self, worker_id: str) -> dict:
        return self.core.worker_done(worker_id).to_dict()

    def get_job(self, job_id: str) -> dict:
        return self.core.job_dict(self.core.get_job(job_id))

    # user-facing operations

    def submit_workflow(self, body: dict) -> str:
        return self.core.submit_workflow(body, self.principal)

    def get_workflow(self, workflow_id: str) -> dict:
        return workflow_dict(self.core, workflow_id)

    def cancel_workflow(self, workflow_id: str) -> None:
        self.core.cancel_workflow(workflow_id, self.principal)

    def list_jobs(self, workflow_id: str | None = None, state: str | None = None) -> list:
        jobs = self.core.list_jobs(workflow_id, JobState(state) if state else None)
        return [self.core.job_dict(j) for j in jobs]

    def get_logs(self, job_id: str, from_offset: int = 0) -> bytes:
        return self.core.get_logs(job_id, from_offset)

    def list_hosts(self) -> list:
        return [host_dict(h) for h in self.core.list_hosts()]

    def register_content(self, doc: dict) -> str:
        return self.core.registry.register_content(doc, self.principal)

    def get_content(self, content_id: str) -> dict:
        return self.core.registry.get_content(content_id, self.principal).to_dict()

    def list_contents(self, content_type: str | None = None, owner: str | None = None) -> list:
        return [
            d.to_dict() for d in self.core.registry.list_contents(self.principal, content_type, owner)
        ]

    def delete_content(self, content_id: str) -> None:
        self.core.registry.delete_content(content_id, self.principal)

    def search_contents(self, query: str, content_type: str | None = None) -> list:
        ranked = self.core.registry.search_contents(query, self.principal, content_type)
        return [
            {
                "content_id": content_id,
                "score": score,
                "name": self.core.registry.contents[content_id].name,
            }
            for content_id, score in ranked
        ]

    def launch_service(self, content_id: str, runner_kind: str = "process") -> str:
        return self.core.launch_service(content_id, self.principal, runner_kind)

    def register_asset(
        self, kind: str, uri: str, metadata: dict | None = None, source_job_id: str | None = None
    ) -> str:
        return self.core.registry.register_asset(self.principal, kind, uri, metadata, source_job_id)

    def get_asset(self, asset_id: str) -> dict:
        return self.core.registry.get_asset(asset_id, self.principal).to_dict()

    def list_assets(self) -> list:
        return [a.to_dict() for a in self.core.registry.list_assets(self.principal)]

    def delete_asset(self, asset_id: str) -> None:
        self.core.registry.delete_asset(asset_id, self.principal)


class HttpApi:
    """Thin httpx wrapper over the /api/v1 endpoints."""

    def __init__(self, base_uri: str, token: str | None = None, timeout: float = 10.0):
        self.base_uri = base_uri.rstrip("/")
        self.token = token
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self.token}"} if self.token else {}

    def _request(self, method: str, path: str, *, json_body=None, params=None) -> httpx.Response:
        try:
            response = self._client.request(
                method,
                f"{self.base_uri}/api/v1{path}",
                json=json_body,
                params=params,
                headers=self._headers(),
            )
        except httpx.TransportError as exc:
            raise PlatformError(f"cannot reach {self.base_uri}: {exc}") from exc
        if response.status_code >= 400:
            raise _wire_error(response)
        return response

    # auth

    def login(self, username: str, password: str) -> dict:
        data = self._request(
            "POST", "/auth/login", json_body={"username": username, "password": password}
        ).json()
        self.token = data["token"]
        return data

    def create_user(self, username: str, password: str, attributes: dict | None = None) -> dict:
        return self._request(
            "POST",
            "/users",
            json_body={"username": username, "password": password, "attributes": attributes or {}},
        ).json()

    def whoami(self) -> dict:
        return self._request("GET", "/whoami").json()

    def create_team(self, name: str, attributes: dict | None = None) -> dict:
        return self._request(
            "POST", "/teams", json_body={"name": name, "attributes": attributes or {}}
        ).json()

    def add_member(self, team_id: str, user_id: str) -> dict:
        return self._request(
            "POST", f"/teams/{team_id}/members", json_body={"user": user_id}
        ).json()

    def remove_member(self, team_id: str, user_id: str) -> None:
        self._request("DELETE", f"/teams/{team_id}/members/{user_id}")

    def grant(self, subject: str, actions: list, resource: str) -> dict:
        return self._request(
            "POST",
            "/grants",
            json_body={"subject": subject, "actions": actions, "resource": resource},
        ).json()

    def revoke(self, subject: str, resource: str) -> None:
        self._request(
            "DELETE", "/grants", json_body={"subject": subject, "resource": resource}
        )

    def check_access(self, user: str, action: str, resource: str) -> dict:
        return self._request(
            "GET", "/access", params={"user": user, "action": action, "resource": resource}
        ).json()

    # worker / launcher protocol

    def register_host(self, host_id: str, cpu_capacity: int, gpu_capacity: int) -> dict:
        return self._request(
            "POST",
            "/hosts",
            json_body={
                "host_id": host_id,
                "cpu_capacity": cpu_capacity,
                "gpu_capacity": gpu_capacity,
            },
        ).json()

    def poll_allocations(self, host_id: str) -> list:
        return self._request("POST", f"/hosts/{host_id}/poll").json()["launches"]

    def next_ready_job(self, worker_id: str) -> dict:
        return self._request("GET", f"/workers/{worker_id}/next").json()

    def report_job_status(self, job_id: str, state: str, log_chunk: bytes, assets: list) -> dict:
        return self._request(
            "POST",
            f"/jobs/{job_id}/status",
            json_body={
                "state": state,
                "log_chunk_b64": base64.b64encode(log_chunk).decode("ascii"),
                "assets": assets,
            },
        ).json()

    def append_log(self, job_id: str, chunk: bytes) -> int:
        return self._request(
            "POST",
            f"/jobs/{job_id}/logs",
            json_body={"chunk_b64": base64.b64encode(chunk).decode("ascii")},
        ).json()["offset"]

    def worker_done(self, worker_id: str) -> dict:
        return self._request("POST", f"/workers/{worker_id}/done").json()

    def get_job(self, job_id: str) -> dict:
        return self._request("GET", f"/jobs/{job_id}").json()

    # workflows and jobs

    def submit_workflow(self, body: dict) -> str:
        return self._request("POST", "/workflows", json_body=body).json()["workflow_id"]

    def get_workflow(self, workflow_id: str) -> dict:
        return self._request("GET", f"/workflows/{workflow_id}").json()

    def cancel_workflow(self, workflow_id: str) -> None:
        self._request("POST", f"/workflows/{workflow_id}/cancel")

    def list_jobs(self, workflow_id: str | None = None, state: str | None = None) -> list:
        params = {}
        if workflow_id:
            params["workflow"] = workflow_id
        if state:
            params["state"] = state
        return self._request("GET", "/jobs", params=params).json()["jobs"]

    def get_logs(self, job_id: str, from_offset: int = 0) -> bytes:
        return self._request(
            "GET", f"/jobs/{job_id}/logs", params={"from": from_offset}
        ).content

    def list_hosts(self) -> list:
        return self._request("GET", "/hosts").json()["hosts"]

    # registry

    def register_content(self, doc: dict) -> str:
        return self._request("POST", "/contents", json_body=doc).json()["content_id"]

    def get_content(self, content_id: str) -> dict:
        return self._request("GET", f"/contents/{content_id}").json()

    def list_contents(self, content_type: str | None = None, owner: str | None = None) -> list:
        params = {}
        if content_type:
            params["type"] = content_type
        if owner:
            params["owner"] = owner
        return self._request("GET", "/contents", params=params).json()["contents"]

    def delete_content(self, content_id: str) -> None:
        self._request("DELETE", f"/contents/{content_id}")

    def search_contents(self, query: str, content_type: str | None = None) -> list:
        params = {"q": query}
        if content_type:
            params["type"] = content_type
        return self._request("GET", "/contents/search", params=params).json()["results"]

    def launch_service(self, content_id: str, runner_kind: str = "process") -> str:
        return self._request(
            "POST", f"/contents/{content_id}/launch", json_body={"runner_kind": runner_kind}
        ).json()["workflow_id"]

    def register_asset(
        self, kind: str, uri: str, metadata: dict | None = None, source_job_id: str | None = None
    ) -> str:
        return self._request(
            "POST",
            "/assets",
            json_body={
                "kind": kind,
                "uri": uri,
                "metadata": metadata or {},
                "source_job_id": source_job_id,
            },
        ).json()["asset_id"]

    def get_asset(self, asset_id: str) -> dict:
        return self._request("GET", f"/assets/{asset_id}").json()

    def list_assets(self) -> list:
        return self._request("GET", "/assets").json()["assets"]

    def delete_asset(self, asset_id: str) -> None:
        self._request("DELETE", f"/assets/{asset_id}")


def _wire_error(response: httpx.Response) -> PlatformError:
    try:
        payload = response.json()["error"]
        return error_for_code(payload["code"], payload.get("message", ""))
    except (ValueError, KeyError):
        return PlatformError(f"HTTP {response.status_code}: {response.text[:200]}")
