"""Pluggable job runners.

A runner turns a job spec into a stream of log bytes plus a final exit
status. The process runner executes the command as a child process with
stdout/stderr interleaved; the mock runner interprets a tiny script
language so tests and demos can run without spawning anything.

Jobs declare produced artifacts inline in their output: any log line of the
form ``::asset::{"uri": ..., "kind": ..., "metadata": ...}`` is collected
by the worker and reported alongside the terminal status. The marker lines
stay in the log (log bytes are never rewritten).

Mock script tokens (anything else is a no-op, so an arbitrary argv runs as
an instant success):

    log:<text>            append <text> plus newline to the log
    sleep:<seconds>       sleep, interruptible by kill
    asset:<kind>:<uri>    emit an asset marker line
    exit:success|failure  final status (default success)
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import time
from dataclasses import dataclass

from .errors import SpawnFailure, UnsupportedRunner

ASSET_MARKER = "::asset::"

_EOF = object()


@dataclass
class RunnerOutcome:
    exit_status: str  # "success" | "failure" | "killed"
    log: bytes


def asset_marker_line(uri: str, kind: str = "job-output", metadata: dict | None = None) -> str:
    entry = {"uri": uri, "kind": kind}
    if metadata:
        entry["metadata"] = metadata
    return ASSET_MARKER + json.dumps(entry)


def extract_assets(log: bytes) -> list[dict]:
    """Collect asset declarations from marker lines; malformed lines are skipped."""
    assets = []
    for line in log.split(b"\n"):
        text = line.decode("utf-8", errors="replace").strip()
        if not text.startswith(ASSET_MARKER):
            continue
        try:
            entry = json.loads(text[len(ASSET_MARKER):])
        except json.JSONDecodeError:
            continue
        if isinstance(entry, dict) and isinstance(entry.get("uri"), str) and entry["uri"]:
            assets.append(entry)
    return assets


class RunHandle:
    """Live handle on one running job: consume log chunks, kill, await status."""

    def __init__(self):
        self._chunks: queue.Queue = queue.Queue()
        self._eof = threading.Event()
        self._killed = threading.Event()
        self._status: str | None = None

    def read_chunk(self, timeout: float) -> bytes | None:
        """Next log chunk, b"" if none arrived in time, None once drained after EOF."""
        try:
            item = self._chunks.get(timeout=timeout)
        except queue.Empty:
            return None if self._eof.is_set() and self._chunks.empty() else b""
        if item is _EOF:
            return None
        return item

    def kill(self) -> None:
        self._killed.set()
        self._do_kill()

    def _do_kill(self) -> None:
        pass

    def finished(self) -> bool:
        return self._eof.is_set()

    def wait_outcome(self, timeout: float | None = None) -> str:
        if not self._eof.wait(timeout):
            raise TimeoutError("runner did not finish in time")
        return self._status  # type: ignore[return-value]

    def _emit(self, chunk: bytes) -> None:
        if chunk:
            self._chunks.put(chunk)

    def _finish(self, status: str) -> None:
        self._status = status
        self._eof.set()
        self._chunks.put(_EOF)


class _ProcessHandle(RunHandle):
    def __init__(self, command: list):
        super().__init__()
        try:
            self._proc = subprocess.Popen(
                command,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                stdin=subprocess.DEVNULL,
            )
        except (OSError, ValueError) as exc:
            raise SpawnFailure(f"cannot spawn {command!r}: {exc}") from exc
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        while True:
            chunk = self._proc.stdout.read1(65536)
            if not chunk:
                break
            self._emit(chunk)
        returncode = self._proc.wait()
        if self._killed.is_set() or returncode < 0:
            self._finish("killed")
        elif returncode == 0:
            self._finish("success")
        else:
            self._finish("failure")

    def _do_kill(self) -> None:
        if self._proc.poll() is None:
            self._proc.kill()


class _MockHandle(RunHandle):
    def __init__(self, script: list):
        super().__init__()
        self._script = list(script)
        threading.Thread(target=self._play, daemon=True).start()

    def _play(self) -> None:
        status = "success"
        for token in self._script:
            if self._killed.is_set():
                break
            if token.startswith("log:"):
                self._emit((token[4:] + "\n").encode())
            elif token.startswith("sleep:"):
                deadline = time.monotonic() + float(token[6:])
                while time.monotonic() < deadline:
                    if self._killed.wait(0.005):
                        break
            elif token.startswith("asset:"):
                _, kind, uri = token.split(":", 2)
                self._emit((asset_marker_line(uri, kind) + "\n").encode())
            elif token.startswith("exit:"):
                status = token[5:]
                if status not in ("success", "failure"):
                    status = "failure"
        self._finish("killed" if self._killed.is_set() else status)

    def _do_kill(self) -> None:
        pass


class ProcessRunner:
    kind = "process"

    def start(self, command: list) -> RunHandle:
        if not command:
            raise SpawnFailure("empty command")
        return _ProcessHandle(command)


class MockRunner:
    kind = "mock"

    def start(self, command: list) -> RunHandle:
        return _MockHandle(command)


_RUNNERS = {"process": ProcessRunner(), "mock": MockRunner()}


def get_runner(kind: str):
    runner = _RUNNERS.get(kind)
    if runner is None:
        raise UnsupportedRunner(f"unsupported runner kind: {kind!r}")
    return runner


def run_job(runner_kind: str, command: list, timeout: float = 60.0) -> RunnerOutcome:
    """Run to completion and collect the full log (non-streaming convenience)."""
    handle = get_runner(runner_kind).start(command)
    log = bytearray()
    deadline = time.monotonic() + timeout
    while True:
        chunk = handle.read_chunk(0.05)
        if chunk is None:
            break
        log.extend(chunk)
        if time.monotonic() > deadline:
            handle.kill()
    status = handle.wait_outcome(timeout=5.0)
    while True:
        chunk = handle.read_chunk(0.01)
        if not chunk:
            break
        log.extend(chunk)
    return RunnerOutcome(status, bytes(log))
