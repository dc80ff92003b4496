"""Operator command line.

``flowdesk`` drives the platform over HTTP: boot the service, seed demo
content, run the end-to-end demo, and poke at workflows and contents.
``flowdesk-launcher`` is the per-host agent daemon.

Configuration precedence everywhere: flag, then environment variable, then
--config JSON file. Exit codes: 0 success, 1 API/runtime error, 2 usage.
"""

from __future__ import annotations

import json
import logging
import signal
import socket
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import httpx

from .client import HttpApi
from .demo import run_demo_pipeline, seed_demo
from .errors import AddressInUse, PlatformError
from .fixtures import DEMO_PASSWORDS, OWNER
from .launcher import Launcher, LauncherConfig
from .server import DEFAULT_AGENT_TOKEN, build_app

DEFAULT_API = "http://127.0.0.1:8151"
DEFAULT_LISTEN = "127.0.0.1:8151"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _api(ctx) -> HttpApi:
    cfg = ctx.obj
    base = cfg.get("api") or cfg.get("file", {}).get("api") or DEFAULT_API
    token = cfg.get("token") or cfg.get("file", {}).get("token")
    return HttpApi(base, token=token)


@click.group()
@click.option("--api", envvar="FLOWDESK_API", default=None, help="API base URI.")
@click.option("--token", envvar="FLOWDESK_TOKEN", default=None, help="Bearer token.")
@click.option("--config", "config_path", envvar="FLOWDESK_CONFIG", default=None, help="JSON config file.")
@click.pass_context
def main(ctx, api, token, config_path):
    """Workflow platform operator tool."""
    ctx.obj = {"api": api, "token": token, "file": _load_config(config_path)}


@main.command()
@click.option("--listen", envvar="FLOWDESK_LISTEN", default=None, help="host:port to bind.")
@click.option("--data-dir", envvar="FLOWDESK_DATA_DIR", default=None, help="Durable data directory (omit for in-memory).")
@click.option("--agent-token", envvar="FLOWDESK_AGENT_TOKEN", default=None, help="Shared token for launcher agents.")
@click.option("--ui-dir", envvar="FLOWDESK_UI_DIR", default=None, help="Static UI bundle to serve under /ui.")
@click.pass_context
def serve(ctx, listen, data_dir, agent_token, ui_dir):
    """Run the platform service (compute API + registry + access control)."""
    import uvicorn

    from .core import PlatformCore

    file_cfg = ctx.obj["file"]
    listen = listen or file_cfg.get("listen") or DEFAULT_LISTEN
    data_dir = data_dir or file_cfg.get("data_dir")
    agent_token = agent_token or file_cfg.get("agent_token") or DEFAULT_AGENT_TOKEN
    ui_dir = ui_dir or file_cfg.get("ui_dir") or _default_ui_dir()

    host, _, port_text = listen.partition(":")
    try:
        port = int(port_text or "8151")
    except ValueError:
        raise click.UsageError(f"bad --listen value: {listen!r}")

    try:
        _check_port_free(host or "127.0.0.1", port)
        core = PlatformCore(data_dir=data_dir)
    except PlatformError as exc:
        _fail(f"{exc.code}: {exc.message}")
        return
    app = build_app(core, agent_token=agent_token, ui_dir=ui_dir)
    mode = f"data dir {data_dir}" if data_dir else "in-memory (no persistence)"
    click.echo(f"serving on http://{host or '127.0.0.1'}:{port} [{mode}]")
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")


def _check_port_free(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise AddressInUse(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()


def _default_ui_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


@main.command()
@click.pass_context
def seed(ctx):
    """Seed demo users, team, and fixture contents; prints ids and tokens."""
    api = _api(ctx)
    try:
        report = seed_demo(api)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(json.dumps(report, indent=2))


@main.command()
@click.option("--runner", type=click.Choice(["process", "mock"]), default="process")
@click.option("--timeout", type=float, default=60.0, show_default=True)
@click.option("--work-dir", default=None, help="Where TRAIN writes the model file.")
@click.pass_context
def demo(ctx, runner, timeout, work_dir):
    """Run the seeded TRAIN->TEST pipeline plus the three app launches."""
    api = _api(ctx)
    try:
        if not api.token:
            api.login(OWNER, DEMO_PASSWORDS[OWNER])
        report = run_demo_pipeline(api, runner_kind=runner, timeout=timeout, work_dir=work_dir)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(_job_table(report["jobs"]))
    click.echo(
        f"\ntrain workflow : {report['train_workflow']}"
        f"\ntest workflow  : {report['test_workflow']}"
        f"\ntrained asset  : {report['asset']['asset_id']} -> {report['asset']['uri']}"
    )
    for name, workflow_id in report["app_workflows"].items():
        click.echo(f"app launch     : {name} -> {workflow_id}")


@main.command()
@click.argument("workflow_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def submit(ctx, workflow_file):
    """Submit a workflow from a JSON file."""
    api = _api(ctx)
    try:
        body = json.loads(Path(workflow_file).read_text())
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{workflow_file} is not valid JSON: {exc}")
    try:
        workflow_id = api.submit_workflow(body)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(workflow_id)


@main.command()
@click.argument("workflow_id")
@click.pass_context
def status(ctx, workflow_id):
    """Show a workflow and its job table."""
    api = _api(ctx)
    try:
        workflow = api.get_workflow(workflow_id)
        jobs = api.list_jobs(workflow_id=workflow_id)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(f"{workflow['workflow_id']}  {workflow['name']}")
    click.echo(f"workers: {workflow['num_workers']}  states: {workflow['job_states']}")
    click.echo(_job_table(jobs))


@main.command()
@click.argument("workflow_id")
@click.pass_context
def cancel(ctx, workflow_id):
    """Cancel a workflow: queued jobs stop now, running ones are flagged."""
    api = _api(ctx)
    try:
        api.cancel_workflow(workflow_id)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(f"cancel requested for {workflow_id}")


@main.command()
@click.argument("query")
@click.option("--type", "content_type", default=None, help="Filter by content type.")
@click.pass_context
def search(ctx, query, content_type):
    """Search registry contents by token overlap."""
    api = _api(ctx)
    try:
        results = api.search_contents(query, content_type)
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    for row in results:
        click.echo(f"{row['score']:>3}  {row['content_id']}  [{row['content_type']}] {row['name']}")
    if not results:
        click.echo("(no matches)")


@main.command()
@click.pass_context
def whoami(ctx):
    """Show the user the configured token resolves to."""
    api = _api(ctx)
    try:
        user = api.whoami()
    except (PlatformError, httpx.HTTPError) as exc:
        _fail(str(exc))
        return
    click.echo(json.dumps(user, indent=2))


def _job_table(jobs: list) -> str:
    headers = ("JOB", "NAME", "STATE", "STARTED", "ENDED", "PARAMETERS")
    rows = [headers]
    for job in jobs:
        params = ", ".join(f"{k}={v}" for k, v in job["parameters"].items())
        rows.append(
            (
                job["job_id"],
                job["name"][:30],
                job["state"],
                _stamp(job["started_at"]),
                _stamp(job["ended_at"]),
                params[:60],
            )
        )
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(headers))]
    lines = ["  ".join(str(cell).ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def _stamp(epoch: float | None) -> str:
    if epoch is None:
        return "-"
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%H:%M:%S")


@click.command()
@click.option("--api", envvar="FLOWDESK_API", default=DEFAULT_API, show_default=True)
@click.option("--host-id", envvar="FLOWDESK_HOST_ID", default=socket.gethostname)
@click.option("--cpu", envvar="FLOWDESK_CPU", type=int, default=2, show_default=True)
@click.option("--gpu", envvar="FLOWDESK_GPU", type=int, default=0, show_default=True)
@click.option("--poll-interval", envvar="FLOWDESK_POLL_INTERVAL", type=float, default=2.0, show_default=True)
@click.option("--token", envvar="FLOWDESK_AGENT_TOKEN", default=DEFAULT_AGENT_TOKEN)
@click.option("--runner-kind", envvar="FLOWDESK_RUNNER_KIND", default=None, help="Force every job onto this runner.")
@click.option("--spawn", type=click.Choice(["process", "thread"]), default="process", show_default=True)
def launcher_main(api, host_id, cpu, gpu, poll_interval, token, runner_kind, spawn):
    """Per-host launcher agent: polls for allocations and spawns workers."""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    try:
        config = LauncherConfig(
            host_id=host_id,
            cpu_capacity=cpu,
            gpu_capacity=gpu,
            api_base_uri=api,
            token=token,
            poll_interval=poll_interval,
            spawn_mode=spawn,
            runner_override=runner_kind,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    client = HttpApi(api, token=token)
    launcher = Launcher(client, config)

    def _stop(_signum, _frame):
        launcher.stop()

    signal.signal(signal.SIGTERM, _stop)
    try:
        launcher.run()
    except PlatformError as exc:
        _fail(f"{exc.code}: {exc.message}")
    except KeyboardInterrupt:
        pass
    finally:
        launcher.shutdown()
        client.close()
