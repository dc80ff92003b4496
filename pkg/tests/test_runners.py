"""Runner tests: process and mock execution, kill handling, asset markers."""

import sys
import time

import pytest

from flowdesk.errors import SpawnFailure, UnsupportedRunner
from flowdesk.runners import asset_marker_line, extract_assets, get_runner, run_job


class TestProcessRunner:
    def test_echo_success(self):
        outcome = run_job("process", ["echo", "hi"])
        assert outcome.exit_status == "success"
        assert outcome.log == b"hi\n"

    def test_nonzero_exit_is_failure(self):
        outcome = run_job("process", [sys.executable, "-c", "import sys; sys.exit(3)"])
        assert outcome.exit_status == "failure"

    def test_stderr_interleaved(self):
        outcome = run_job(
            "process",
            [
                sys.executable,
                "-c",
                "import sys; print('out'); sys.stdout.flush(); print('err', file=sys.stderr)",
            ],
        )
        assert outcome.exit_status == "success"
        assert b"out\n" in outcome.log and b"err\n" in outcome.log

    def test_kill_mid_run(self):
        handle = get_runner("process").start(
            [sys.executable, "-c", "import time; print('started', flush=True); time.sleep(30)"]
        )
        # wait for the child to actually start
        log = bytearray()
        deadline = time.monotonic() + 5
        while b"started" not in log and time.monotonic() < deadline:
            chunk = handle.read_chunk(0.05)
            if chunk:
                log.extend(chunk)
        handle.kill()
        assert handle.wait_outcome(timeout=5.0) == "killed"

    def test_spawn_failure(self):
        with pytest.raises(SpawnFailure):
            get_runner("process").start(["/no/such/binary-xyz"])

    def test_unsupported_kind(self):
        with pytest.raises(UnsupportedRunner):
            get_runner("docker")


class TestMockRunner:
    def test_scripted_success(self):
        outcome = run_job("mock", ["log:epoch 1", "log:epoch 2"])
        assert outcome.exit_status == "success"
        assert outcome.log == b"epoch 1\nepoch 2\n"

    def test_scripted_failure(self):
        outcome = run_job("mock", ["log:boom", "exit:failure"])
        assert outcome.exit_status == "failure"

    def test_unknown_tokens_are_noops(self):
        outcome = run_job("mock", [sys.executable, "-c", "whatever"])
        assert outcome.exit_status == "success"
        assert outcome.log == b""

    def test_kill_during_sleep(self):
        handle = get_runner("mock").start(["log:start", "sleep:30", "log:never"])
        time.sleep(0.05)
        handle.kill()
        assert handle.wait_outcome(timeout=5.0) == "killed"

    def test_asset_token_emits_marker(self):
        outcome = run_job("mock", ["asset:trained-model:file:///tmp/m.bin"])
        assets = extract_assets(outcome.log)
        assert assets == [{"uri": "file:///tmp/m.bin", "kind": "trained-model"}]


class TestAssetMarkers:
    def test_round_trip(self):
        line = asset_marker_line("file:///x", "mask", {"frames": 12})
        assets = extract_assets((line + "\n").encode())
        assert assets == [{"uri": "file:///x", "kind": "mask", "metadata": {"frames": 12}}]

    def test_malformed_markers_skipped(self):
        log = b"::asset::{not json}\n::asset::42\nplain line\n"
        assert extract_assets(log) == []

    def test_markers_amid_other_output(self):
        log = b"training...\n" + asset_marker_line("file:///m").encode() + b"\ndone\n"
        assert extract_assets(log) == [{"uri": "file:///m", "kind": "job-output"}]
