"""Per-host launcher daemon and worker executor.

The launcher registers its host, then polls the compute API on a fixed
interval for allocations and spawns one worker per grant (thread mode for
in-process tests, child process mode for real deployments). Workers pull
their assigned jobs one at a time, stream log chunks while the runner
executes, report the terminal state with any declared assets, and finally
call worker_done so the grant returns to the host.

All shared state lives on the API side; the launcher only remembers which
worker ids it already spawned so a flaky connection can never double-spawn.
"""

from __future__ import annotations

import logging
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field

from .errors import PlatformError, SpawnFailure, UnsupportedRunner
from .runners import extract_assets, get_runner

logger = logging.getLogger(__name__)

FLUSH_BYTES = 8192
FLUSH_SECONDS = 1.0


@dataclass
class LauncherConfig:
    host_id: str
    cpu_capacity: int
    gpu_capacity: int
    api_base_uri: str | None = None
    token: str | None = None
    poll_interval: float = 2.0
    spawn_mode: str = "thread"  # "thread" | "process"
    runner_override: str | None = None  # force every job onto this runner kind

    def __post_init__(self):
        if self.poll_interval <= 0:
            raise ValueError("poll_interval must be positive")
        if self.spawn_mode not in ("thread", "process"):
            raise ValueError(f"unknown spawn_mode {self.spawn_mode!r}")


class Launcher:
    """Polling loop plus supervision of the workers it spawned."""

    def __init__(self, api, config: LauncherConfig):
        self.api = api
        self.config = config
        self._spawned: set[str] = set()
        self._threads: list[threading.Thread] = []
        self._procs: list[subprocess.Popen] = []
        self._stop = threading.Event()

    def register(self) -> None:
        """Announce the host; an already-registered host is fine on restart."""
        try:
            self.api.register_host(
                self.config.host_id, self.config.cpu_capacity, self.config.gpu_capacity
            )
        except PlatformError as exc:
            if exc.code != "DuplicateHost":
                raise
            logger.info("host %s already registered", self.config.host_id)

    def poll_once(self) -> int:
        """One poll: spawn a worker for each fresh allocation. Returns spawn count."""
        try:
            launches = self.api.poll_allocations(self.config.host_id)
        except Exception as exc:  # noqa: BLE001 - API outage must not kill the loop
            logger.warning("poll failed, will retry: %s", exc)
            return 0
        count = 0
        for launch in launches:
            worker_id = launch["worker_id"]
            if worker_id in self._spawned:
                continue
            self._spawned.add(worker_id)
            self._spawn(worker_id)
            count += 1
        return count

    def _spawn(self, worker_id: str) -> None:
        if self.config.spawn_mode == "thread":
            thread = threading.Thread(
                target=worker_loop,
                args=(worker_id, self.api),
                kwargs={
                    "poll_interval": self.config.poll_interval,
                    "runner_override": self.config.runner_override,
                },
                name=f"worker-{worker_id}",
                daemon=True,
            )
            thread.start()
            self._threads.append(thread)
        else:
            argv = [
                sys.executable,
                "-m",
                "flowdesk.worker_main",
                "--api",
                self.config.api_base_uri or "",
                "--worker-id",
                worker_id,
                "--poll-interval",
                str(self.config.poll_interval),
            ]
            if self.config.token:
                argv += ["--token", self.config.token]
            if self.config.runner_override:
                argv += ["--runner-override", self.config.runner_override]
            self._procs.append(subprocess.Popen(argv))

    def run(self, max_loops: int | None = None) -> None:
        """Register then poll until stopped (or for max_loops iterations).

        An unreachable API is retried every interval, at registration time
        and during polling alike; only a genuine rejection of this host's
        configuration (bad capacities, auth) escapes.
        """
        while not self._stop.is_set():
            try:
                self.register()
                break
            except PlatformError as exc:
                if exc.code != "PlatformError":
                    raise  # the API rejected the configuration: unrecoverable
                logger.warning("cannot register host yet, retrying: %s", exc)
                self._stop.wait(self.config.poll_interval)
            except Exception as exc:  # noqa: BLE001 - transport-level outage
                logger.warning("cannot register host yet, retrying: %s", exc)
                self._stop.wait(self.config.poll_interval)
        loops = 0
        while not self._stop.is_set():
            self.poll_once()
            loops += 1
            if max_loops is not None and loops >= max_loops:
                return
            self._stop.wait(self.config.poll_interval)

    def stop(self) -> None:
        self._stop.set()

    def shutdown(self, timeout: float = 10.0) -> None:
        """Stop polling and reap every worker this launcher spawned."""
        self.stop()
        deadline = time.monotonic() + timeout
        for thread in self._threads:
            thread.join(max(0.0, deadline - time.monotonic()))
        for proc in self._procs:
            try:
                proc.wait(max(0.01, deadline - time.monotonic()))
            except subprocess.TimeoutExpired:
                proc.terminate()
                try:
                    proc.wait(2.0)
                except subprocess.TimeoutExpired:
                    proc.kill()

    def idle(self) -> bool:
        return all(not t.is_alive() for t in self._threads) and all(
            p.poll() is not None for p in self._procs
        )


def worker_loop(
    worker_id: str,
    api,
    poll_interval: float = 2.0,
    runner_override: str | None = None,
) -> None:
    """Run assigned jobs sequentially until the API says done, then terminate.

    Blocked jobs are retried every poll interval; after the final job the
    worker reports done exactly once and returns (the process-mode wrapper
    exits the interpreter).
    """
    while True:
        try:
            action = api.next_ready_job(worker_id)
        except PlatformError as exc:
            logger.error("worker %s cannot fetch work: %s", worker_id, exc)
            return
        kind = action["kind"]
        if kind == "wait":
            time.sleep(poll_interval)
            continue
        if kind == "done":
            api.worker_done(worker_id)
            return
        _execute_job(action["job"], api, poll_interval, runner_override)


@dataclass
class _LogPump:
    """Buffers runner output and flushes it to the API on the 8 KiB / 1 s rule."""

    api: object
    job_id: str
    buffer: bytearray = field(default_factory=bytearray)
    full_log: bytearray = field(default_factory=bytearray)
    last_flush: float = field(default_factory=time.monotonic)

    def add(self, chunk: bytes) -> None:
        self.buffer.extend(chunk)
        self.full_log.extend(chunk)
        if len(self.buffer) >= FLUSH_BYTES or time.monotonic() - self.last_flush >= FLUSH_SECONDS:
            self.flush()

    def flush(self) -> None:
        if self.buffer:
            self.api.append_log(self.job_id, bytes(self.buffer))
            self.buffer.clear()
        self.last_flush = time.monotonic()

    def tail(self) -> bytes:
        """Remaining unflushed bytes, handed to the terminal status report."""
        tail = bytes(self.buffer)
        self.buffer.clear()
        return tail


def _execute_job(job: dict, api, poll_interval: float, runner_override: str | None) -> None:
    job_id = job["job_id"]
    runner_kind = runner_override or job["runner_kind"]
    try:
        handle = get_runner(runner_kind).start(job["command"])
    except (UnsupportedRunner, SpawnFailure) as exc:
        api.report_job_status(job_id, "FAILED", f"runner error: {exc}\n".encode(), [])
        return

    pump = _LogPump(api, job_id)
    cancel_requested = False
    next_cancel_check = time.monotonic()
    read_timeout = min(max(poll_interval / 2, 0.01), 0.25)
    while True:
        chunk = handle.read_chunk(read_timeout)
        if chunk is None:
            break
        if chunk:
            pump.add(chunk)
        if not cancel_requested and time.monotonic() >= next_cancel_check:
            next_cancel_check = time.monotonic() + poll_interval
            try:
                snapshot = api.get_job(job_id)
            except PlatformError:
                snapshot = None
            if snapshot and (
                snapshot.get("cancel_requested") or snapshot.get("workflow_cancel_requested")
            ):
                cancel_requested = True
                handle.kill()

    status = handle.wait_outcome(timeout=5.0)
    if status == "success":
        state = "COMPLETED"
    elif status == "killed" and cancel_requested:
        state = "CANCELED"
    else:
        state = "FAILED"

    assets = extract_assets(bytes(pump.full_log)) if state == "COMPLETED" else []
    if state == "COMPLETED" and job.get("output_uri"):
        declared = {a["uri"] for a in assets}
        if job["output_uri"] not in declared:
            assets.append({"uri": job["output_uri"]})
    api.report_job_status(job_id, state, pump.tail(), assets)
