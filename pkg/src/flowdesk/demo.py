"""Seeding and end-to-end demo orchestration.

``seed_demo`` populates a fresh platform with three users, one team, and
the fixture contents, refusing to run twice (no partial writes on refusal).
``run_demo_pipeline`` drives the two-step model flow: submit the TRAIN
workflow, wait for the trained-model asset, submit a TEST workflow whose
parameters point at that asset, then launch the three standalone apps in
parallel; it returns a report suitable for printing as a job table.
"""

from __future__ import annotations

import tempfile
import time
import uuid
from pathlib import Path

from . import fixtures
from .errors import BadCredentials, DuplicateContent, TimeoutWaitingForCompletion

TERMINAL = {"COMPLETED", "FAILED", "CANCELED"}


def seed_demo(api) -> dict:
    """Create demo users, team, and fixture contents; returns created ids.

    The api client ends up logged in as the demo owner. A platform that
    already holds the demo owner account is refused before anything is
    written.
    """
    try:
        api.login(fixtures.OWNER, fixtures.DEMO_PASSWORDS[fixtures.OWNER])
    except BadCredentials:
        pass
    else:
        raise DuplicateContent("demo fixtures already seeded (demo-owner account exists)")

    users = {}
    tokens = {}
    for username in (fixtures.OWNER, fixtures.TEAMMATE, fixtures.STRANGER):
        node = api.create_user(username, fixtures.DEMO_PASSWORDS[username], {"username": username})
        users[username] = node["node_id"]
    for username in (fixtures.STRANGER, fixtures.TEAMMATE, fixtures.OWNER):
        login = api.login(username, fixtures.DEMO_PASSWORDS[username])
        tokens[username] = login.get("token")

    team = api.create_team("demo-team")
    api.add_member(team["node_id"], users[fixtures.TEAMMATE])

    model_id = api.register_content(fixtures.segmentation_model_doc())
    app_ids = {doc["name"]: api.register_content(doc) for doc in fixtures.labeling_app_docs()}
    template_id = api.register_content(fixtures.workflow_template_doc())
    api.grant(team["node_id"], ["read"], model_id)

    return {
        "users": users,
        "tokens": tokens,
        "team_id": team["node_id"],
        "model_id": model_id,
        "app_ids": app_ids,
        "template_id": template_id,
    }


def wait_for_workflow(api, workflow_id: str, timeout: float, poll: float = 0.25) -> list:
    """Poll until every job in the workflow is terminal; returns the job dicts."""
    deadline = time.monotonic() + timeout
    while True:
        jobs = api.list_jobs(workflow_id=workflow_id)
        if jobs and all(j["state"] in TERMINAL for j in jobs):
            return jobs
        if time.monotonic() >= deadline:
            states = {j["job_id"]: j["state"] for j in jobs}
            raise TimeoutWaitingForCompletion(
                f"workflow {workflow_id} still not settled after {timeout:.0f}s "
                f"(job states: {states}; is a launcher running?)"
            )
        time.sleep(poll)


def run_demo_pipeline(
    api,
    runner_kind: str = "process",
    timeout: float = 60.0,
    work_dir: str | None = None,
) -> dict:
    """TRAIN -> asset handoff -> TEST, then three parallel app launches."""
    model_doc = _find_model(api)
    defaults = {p["param_name"]: p["default"] for p in model_doc["parameters"]}

    work_dir = work_dir or tempfile.mkdtemp(prefix="flowdesk-demo-")
    model_path = str(Path(work_dir) / f"model-{uuid.uuid4().hex[:6]}.bin")

    train_wf = api.submit_workflow(
        {
            "name": f"TRAIN {model_doc['name']}",
            "jobs": [
                {
                    "job_id": "train",
                    "name": f"TRAIN {model_doc['name']}",
                    "runner_kind": runner_kind,
                    "command": fixtures.train_job_command(runner_kind, model_path),
                    "parameters": {"action": "TRAIN", **defaults},
                    "output_uri": f"file://{model_path}",
                }
            ],
            "num_workers": 1,
            "worker_request": {"cpu": 1, "gpu": 0},
        }
    )
    train_jobs = wait_for_workflow(api, train_wf, timeout)
    train_job = train_jobs[0]
    if train_job["state"] != "COMPLETED":
        raise TimeoutWaitingForCompletion(
            f"TRAIN job finished as {train_job['state']}, expected COMPLETED"
        )

    asset = _trained_model_asset(api, train_job)
    if runner_kind == "process" and asset["uri"].startswith("file://"):
        if not Path(asset["uri"][len("file://"):]).exists():
            raise TimeoutWaitingForCompletion(f"trained model file missing: {asset['uri']}")

    test_wf = api.submit_workflow(
        {
            "name": f"TEST {model_doc['name']}",
            "jobs": [
                {
                    "job_id": "test",
                    "name": f"TEST {model_doc['name']}",
                    "runner_kind": runner_kind,
                    "command": fixtures.test_job_command(runner_kind, asset["uri"]),
                    "parameters": {"action": "TEST", "model_uri": asset["uri"], **defaults},
                }
            ],
            "num_workers": 1,
            "worker_request": {"cpu": 1, "gpu": 0},
        }
    )
    test_jobs = wait_for_workflow(api, test_wf, timeout)
    if test_jobs[0]["state"] != "COMPLETED":
        raise TimeoutWaitingForCompletion(
            f"TEST job finished as {test_jobs[0]['state']}, expected COMPLETED"
        )

    app_workflows = {}
    for doc in api.list_contents(content_type="app"):
        if doc["service"]:
            app_workflows[doc["name"]] = api.launch_service(doc["content_id"], runner_kind)
    app_jobs = []
    for name, workflow_id in app_workflows.items():
        jobs = wait_for_workflow(api, workflow_id, timeout)
        app_jobs.extend(jobs)
        if any(j["state"] != "COMPLETED" for j in jobs):
            raise TimeoutWaitingForCompletion(f"app launch {name!r} did not complete")

    return {
        "train_workflow": train_wf,
        "test_workflow": test_wf,
        "asset": asset,
        "app_workflows": app_workflows,
        "jobs": train_jobs + test_jobs + app_jobs,
    }


def _find_model(api) -> dict:
    for doc in api.list_contents(content_type="model"):
        if doc["name"] == fixtures.MODEL_NAME:
            return doc
    raise TimeoutWaitingForCompletion(
        f"model {fixtures.MODEL_NAME!r} not registered; run seed first"
    )


def _trained_model_asset(api, train_job: dict) -> dict:
    for asset_id in train_job["assets"]:
        asset = api.get_asset(asset_id)
        if asset["kind"] == "trained-model" and asset["source_job_id"] == train_job["job_id"]:
            return asset
    raise TimeoutWaitingForCompletion(
        f"TRAIN job {train_job['job_id']} registered no trained-model asset"
    )
