"""Journal replay tests: restart recovers state, corruption is surfaced."""

import pytest

from flowdesk.core import JobState, PlatformCore
from flowdesk.errors import CorruptDataDir
from flowdesk.journal import JOURNAL_NAME, Journal, load_journal


class TestJournal:
    def test_put_del_replay(self, tmp_path):
        journal = Journal(tmp_path)
        journal.record_put("things", "a", {"x": 1})
        journal.record_put("things", "b", {"x": 2})
        journal.record_del("things", "a")
        journal.record_log("job-1", b"hello ")
        journal.record_log("job-1", b"world")
        journal.close()
        tables, logs = load_journal(tmp_path)
        assert tables["things"] == {"b": {"x": 2}}
        assert bytes(logs["job-1"]) == b"hello world"

    def test_missing_dir_is_empty(self, tmp_path):
        tables, logs = load_journal(tmp_path / "nope")
        assert tables == {} and logs == {}

    def test_in_memory_mode_writes_nothing(self, tmp_path):
        journal = Journal(None)
        journal.record_put("t", "k", {})
        assert not journal.persistent
        assert list(tmp_path.iterdir()) == []

    def test_corrupt_line_raises(self, tmp_path):
        (tmp_path / JOURNAL_NAME).write_text('{"t":"put","tab":"x","k":"a","v":{}}\n{broken\n')
        with pytest.raises(CorruptDataDir):
            load_journal(tmp_path)

    def test_unknown_record_type_raises(self, tmp_path):
        (tmp_path / JOURNAL_NAME).write_text('{"t":"weird"}\n')
        with pytest.raises(CorruptDataDir):
            load_journal(tmp_path)


class TestPlatformRestart:
    def test_full_state_survives_restart(self, tmp_path):
        core = PlatformCore(data_dir=tmp_path)
        user = core.access.create_user({"name": "alice"}).node_id
        core.access.set_credentials(user, "alice", "pw")
        core.register_host("h1", 4, 1)
        content_id = core.registry.register_content(
            {
                "content_type": "model",
                "name": "edge-detector",
                "version": "1.0",
                "uri": "https://example.org/m",
                "public": True,
            },
            user,
        )
        wf = core.submit_workflow(
            {
                "jobs": [
                    {"job_id": "a", "runner_kind": "mock", "command": ["log:x"]},
                    {"job_id": "b", "runner_kind": "mock", "command": ["log:y"], "depends_on": ["a"]},
                ],
                "num_workers": 1,
                "worker_request": {"cpu": 1, "gpu": 0},
            },
            user,
        )
        core.poll_allocations("h1")
        core.next_ready_job(f"{wf}.w1")
        core.append_log(f"{wf}.a", b"partial output\n")
        core.close()

        reborn = PlatformCore(data_dir=tmp_path)
        assert reborn.registry.get_content(content_id, user).name == "edge-detector"
        assert reborn.hosts["h1"].cpu_available == 3  # allocation still committed
        assert reborn.jobs[f"{wf}.a"].state is JobState.RUNNING
        assert reborn.get_logs(f"{wf}.a") == b"partial output\n"
        assert reborn.get_worker(f"{wf}.w1").state.value == "ACTIVE"
        assert reborn.access.authenticate("alice", "pw")
        # search index rebuilt from the journal
        assert reborn.registry.search_contents("edge", user)
        reborn.close()

    def test_pending_queue_survives(self, tmp_path):
        core = PlatformCore(data_dir=tmp_path)
        user = core.access.create_user().node_id
        core.submit_workflow(
            {
                "jobs": [{"job_id": "a", "runner_kind": "mock", "command": []}],
                "num_workers": 1,
                "worker_request": {"cpu": 2, "gpu": 0},
            },
            user,
        )
        core.close()
        reborn = PlatformCore(data_dir=tmp_path)
        assert len(reborn.pending) == 1
        assert reborn.pending[0].request.cpu == 2
        # a fresh host can still pick the worker up
        reborn.register_host("h1", 4, 0)
        assert len(reborn.poll_allocations("h1")) == 1
        reborn.close()

    def test_submit_seq_not_reused_after_restart(self, tmp_path):
        core = PlatformCore(data_dir=tmp_path)
        user = core.access.create_user().node_id
        body = {
            "jobs": [{"job_id": "a", "runner_kind": "mock", "command": []}],
            "num_workers": 1,
            "worker_request": {"cpu": 1, "gpu": 0},
        }
        core.submit_workflow(body, user)
        first_seq = core.pending[0].submit_seq
        core.close()
        reborn = PlatformCore(data_dir=tmp_path)
        reborn.submit_workflow(body, user)
        seqs = [w.submit_seq for w in reborn.pending]
        assert len(set(seqs)) == 2 and max(seqs) > first_seq
        reborn.close()

    def test_token_survives_restart(self, tmp_path):
        core = PlatformCore(data_dir=tmp_path)
        user = core.access.create_user().node_id
        core.access.set_credentials(user, "alice", "pw")
        token = core.access.authenticate("alice", "pw")
        core.close()
        reborn = PlatformCore(data_dir=tmp_path)
        assert reborn.access.resolve_token(token).node_id == user
        reborn.close()
