"""HTTP surface over a PlatformCore: JSON request/response, bearer auth.

Two kinds of callers authenticate: users present tokens minted by login,
and launcher agents present the shared agent token from the server config
("poll authorization"). Agent credentials unlock only the worker protocol
endpoints; anything with ownership semantics requires a user token.

Errors travel as ``{"error": {"code", "message"}}`` with the code taken
from the raised PlatformError, so black-box clients can rebuild typed
errors.
"""

from __future__ import annotations

import base64
import binascii
import json
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .access import AccessDecision
from .client import host_dict, workflow_dict
from .core import JobState, PlatformCore
from .errors import AccessDenied, BadCredentials, DuplicateNode, PlatformError, SchemaViolation

DEFAULT_AGENT_TOKEN = "agent-dev-token"

_AGENT = "@agent"


def build_app(core: PlatformCore, agent_token: str = DEFAULT_AGENT_TOKEN, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="flowdesk", docs_url=None, redoc_url=None)

    @app.exception_handler(PlatformError)
    async def _platform_error(_request: Request, exc: PlatformError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "InvalidRequest", "message": str(exc)}},
        )

    def principal_of(request: Request) -> str:
        """Resolve the bearer token to a user id or the agent pseudo-principal."""
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise BadCredentials("missing bearer token")
        token = header[7:].strip()
        if token == agent_token:
            return _AGENT
        with core.lock:  # expired-token pruning mutates state
            return core.access.resolve_token(token).node_id

    def user_of(request: Request) -> str:
        principal = principal_of(request)
        if principal == _AGENT:
            raise AccessDenied("a user token is required for this operation")
        return principal

    # -- liveness ----------------------------------------------------------

    @app.get("/api/v1/ping")
    def ping():
        return {"ok": True}

    # -- auth and graph ------------------------------------------------------

    @app.post("/api/v1/auth/login")
    def login(body: dict = Body(...)):
        with core.lock:
            token = core.access.authenticate(
                str(body.get("username", "")), str(body.get("password", ""))
            )
            user = core.access.resolve_token(token)
        return {"token": token, "user": user.to_dict()}

    @app.post("/api/v1/users")
    def create_user(body: dict = Body(...)):
        username = body.get("username")
        password = body.get("password")
        if not isinstance(username, str) or not username:
            raise SchemaViolation("username must be a non-empty string")
        if not isinstance(password, str) or not password:
            raise SchemaViolation("password must be a non-empty string")
        attributes = dict(body.get("attributes") or {})
        attributes.setdefault("username", username)
        with core.lock:
            if core.access.has_username(username):
                raise DuplicateNode(f"username already registered: {username}")
            node = core.access.create_user(attributes)
            core.access.set_credentials(node.node_id, username, password)
        return node.to_dict()

    @app.get("/api/v1/whoami")
    def whoami(request: Request):
        with core.lock:
            return core.access.resolve_token(_bearer(request)).to_dict()

    def _bearer(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise BadCredentials("missing bearer token")
        return header[7:].strip()

    @app.post("/api/v1/teams")
    def create_team(request: Request, body: dict = Body(...)):
        principal = user_of(request)
        attributes = dict(body.get("attributes") or {})
        if body.get("name"):
            attributes.setdefault("name", body["name"])
        with core.lock:
            return core.access.create_team(principal, attributes).to_dict()

    @app.post("/api/v1/teams/{team_id}/members")
    def add_member(team_id: str, request: Request, body: dict = Body(...)):
        principal = user_of(request)
        with core.lock:
            edge = core.access.add_member(team_id, str(body.get("user", "")), principal)
        return edge.to_dict()

    @app.delete("/api/v1/teams/{team_id}/members/{user_id}")
    def remove_member(team_id: str, user_id: str, request: Request):
        principal = user_of(request)
        with core.lock:
            core.access.remove_member(team_id, user_id, principal)
        return {}

    @app.post("/api/v1/grants")
    def grant(request: Request, body: dict = Body(...)):
        principal = user_of(request)
        with core.lock:
            edge = core.access.grant(
                principal,
                str(body.get("subject", "")),
                body.get("actions") or [],
                str(body.get("resource", "")),
            )
        return edge.to_dict()

    @app.delete("/api/v1/grants")
    def revoke(request: Request, body: dict = Body(...)):
        principal = user_of(request)
        with core.lock:
            core.access.revoke(principal, str(body.get("subject", "")), str(body.get("resource", "")))
        return {}

    @app.get("/api/v1/access")
    def access_query(user: str, action: str, resource: str, request: Request):
        principal_of(request)
        decision: AccessDecision = core.access.check_access(user, action, resource)
        return decision.to_dict()

    # -- hosts and scheduling ---------------------------------------------------

    @app.post("/api/v1/hosts")
    def register_host(request: Request, body: dict = Body(...)):
        principal_of(request)
        host_id = body.get("host_id")
        if not isinstance(host_id, str) or not host_id:
            raise SchemaViolation("host_id must be a non-empty string")
        host = core.register_host(
            host_id, int(body.get("cpu_capacity", 0)), int(body.get("gpu_capacity", 0))
        )
        return host_dict(host)

    @app.get("/api/v1/hosts")
    def list_hosts(request: Request):
        principal_of(request)
        return {"hosts": [host_dict(h) for h in core.list_hosts()]}

    @app.post("/api/v1/hosts/{host_id}/poll")
    def poll(host_id: str, request: Request):
        principal_of(request)
        return {"launches": core.poll_allocations(host_id)}

    # -- workflows ---------------------------------------------------------------

    @app.post("/api/v1/workflows")
    def submit_workflow(request: Request, body: dict = Body(...)):
        principal = user_of(request)
        workflow_id = core.submit_workflow(body, principal)
        return {"workflow_id": workflow_id}

    @app.get("/api/v1/workflows/{workflow_id}")
    def get_workflow(workflow_id: str, request: Request):
        principal_of(request)
        return workflow_dict(core, workflow_id)

    @app.post("/api/v1/workflows/{workflow_id}/cancel")
    def cancel_workflow(workflow_id: str, request: Request):
        principal = user_of(request)
        core.cancel_workflow(workflow_id, principal)
        return {}

    # -- jobs -----------------------------------------------------------------------

    @app.get("/api/v1/jobs")
    def list_jobs(request: Request, workflow: str | None = None, state: str | None = None):
        principal_of(request)
        if state is not None:
            try:
                parsed_state = JobState(state)
            except ValueError as exc:
                raise SchemaViolation(f"unknown job state {state!r}") from exc
        else:
            parsed_state = None
        jobs = core.list_jobs(workflow, parsed_state)
        return {"jobs": [core.job_dict(j) for j in jobs]}

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str, request: Request):
        principal_of(request)
        return core.job_dict(core.get_job(job_id))

    @app.get("/api/v1/jobs/{job_id}/logs")
    def get_logs(job_id: str, request: Request, from_offset: int = Query(0, alias="from")):
        principal_of(request)
        data = core.get_logs(job_id, from_offset)
        return Response(content=data, media_type="application/octet-stream")

    @app.post("/api/v1/jobs/{job_id}/logs")
    def append_log(job_id: str, request: Request, body: dict = Body(...)):
        principal_of(request)
        offset = core.append_log(job_id, _decode_chunk(body.get("chunk_b64", "")))
        return {"offset": offset}

    @app.post("/api/v1/jobs/{job_id}/status")
    def report_status(job_id: str, request: Request, body: dict = Body(...)):
        principal_of(request)
        try:
            state = JobState(body.get("state", ""))
        except ValueError as exc:
            raise SchemaViolation(f"unknown job state {body.get('state')!r}") from exc
        assets = body.get("assets") or []
        if not isinstance(assets, list):
            raise SchemaViolation("assets must be a list")
        job = core.report_job_status(
            job_id, state, _decode_chunk(body.get("log_chunk_b64", "")), assets
        )
        return core.job_dict(job)

    # -- workers -------------------------------------------------------------------------

    @app.get("/api/v1/workers/{worker_id}/next")
    def next_ready(worker_id: str, request: Request):
        principal_of(request)
        action = core.next_ready_job(worker_id)
        return {"kind": action.kind, "job": core.job_dict(action.job) if action.job else None}

    @app.post("/api/v1/workers/{worker_id}/done")
    def worker_done(worker_id: str, request: Request):
        principal_of(request)
        return core.worker_done(worker_id).to_dict()

    # -- content registry ------------------------------------------------------------------

    @app.get("/api/v1/contents/search")
    def search_contents(q: str, request: Request, type: str | None = None):
        principal = user_of(request)
        ranked = core.registry.search_contents(q, principal, type)
        return {
            "results": [
                {
                    "content_id": content_id,
                    "score": score,
                    "name": core.registry.contents[content_id].name,
                    "content_type": core.registry.contents[content_id].content_type,
                }
                for content_id, score in ranked
            ]
        }

    @app.post("/api/v1/contents")
    async def register_content(request: Request):
        principal = user_of(request)
        doc = _strict_json_object(await request.body())
        return {"content_id": core.registry.register_content(doc, principal)}

    @app.get("/api/v1/contents")
    def list_contents(request: Request, type: str | None = None, owner: str | None = None):
        principal = user_of(request)
        docs = core.registry.list_contents(principal, type, owner)
        return {"contents": [d.to_dict() for d in docs]}

    @app.get("/api/v1/contents/{content_id}")
    def get_content(content_id: str, request: Request):
        principal = user_of(request)
        return core.registry.get_content(content_id, principal).to_dict()

    @app.delete("/api/v1/contents/{content_id}")
    def delete_content(content_id: str, request: Request):
        principal = user_of(request)
        core.registry.delete_content(content_id, principal)
        return {}

    @app.post("/api/v1/contents/{content_id}/launch")
    def launch_content(content_id: str, request: Request, body: dict = Body(default={})):
        principal = user_of(request)
        runner_kind = body.get("runner_kind", "process")
        return {"workflow_id": core.launch_service(content_id, principal, runner_kind)}

    # -- assets -------------------------------------------------------------------------------

    @app.post("/api/v1/assets")
    def register_asset(request: Request, body: dict = Body(...)):
        principal = user_of(request)
        unknown = set(body) - {"kind", "uri", "metadata", "source_job_id"}
        if unknown:
            raise SchemaViolation(f"unknown asset key {sorted(unknown)[0]!r}")
        asset_id = core.registry.register_asset(
            principal,
            body.get("kind", ""),
            body.get("uri", ""),
            body.get("metadata"),
            body.get("source_job_id"),
        )
        return {"asset_id": asset_id}

    @app.get("/api/v1/assets")
    def list_assets(request: Request):
        principal = user_of(request)
        return {"assets": [a.to_dict() for a in core.registry.list_assets(principal)]}

    @app.get("/api/v1/assets/{asset_id}")
    def get_asset(asset_id: str, request: Request):
        principal = user_of(request)
        return core.registry.get_asset(asset_id, principal).to_dict()

    @app.delete("/api/v1/assets/{asset_id}")
    def delete_asset(asset_id: str, request: Request):
        principal = user_of(request)
        core.registry.delete_asset(asset_id, principal)
        return {}

    # -- UI bundle ---------------------------------------------------------------------------------

    if ui_dir and Path(ui_dir).is_dir():

        @app.get("/ui/bootstrap.json")
        def bootstrap():
            return {"api_base": "/api/v1"}

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _decode_chunk(encoded: str) -> bytes:
    if not isinstance(encoded, str):
        raise SchemaViolation("chunk must be base64 text")
    try:
        return base64.b64decode(encoded, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise SchemaViolation(f"invalid base64 chunk: {exc}") from exc


def _strict_json_object(raw: bytes) -> dict:
    """Parse a JSON object, rejecting duplicate keys by name."""

    def no_duplicates(pairs):
        seen = set()
        for key, _ in pairs:
            if key in seen:
                raise SchemaViolation(f"duplicate content document key {key!r}")
            seen.add(key)
        return dict(pairs)

    try:
        parsed = json.loads(raw.decode("utf-8"), object_pairs_hook=no_duplicates)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"body is not valid JSON: {exc}") from exc
    if not isinstance(parsed, dict):
        raise SchemaViolation("content document must be a JSON object")
    return parsed
