"""Append-only JSON-lines journal backing the platform's single data directory.

Every state mutation is recorded as one line — a table put/delete or a job
log chunk — before the operation is acknowledged. Restart replays the file
in order to rebuild the in-memory tables. There is no compaction; at desk
scale the journal stays small.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

from .errors import CorruptDataDir

JOURNAL_NAME = "journal.ndjson"


class Journal:
    """Writer half: appends one JSON object per mutation and flushes."""

    def __init__(self, data_dir: str | Path | None):
        self._fh = None
        if data_dir is not None:
            path = Path(data_dir)
            path.mkdir(parents=True, exist_ok=True)
            self._fh = open(path / JOURNAL_NAME, "a", encoding="utf-8")

    @property
    def persistent(self) -> bool:
        return self._fh is not None

    def record_put(self, table: str, key: str, value: dict) -> None:
        self._append({"t": "put", "tab": table, "k": key, "v": value})

    def record_del(self, table: str, key: str) -> None:
        self._append({"t": "del", "tab": table, "k": key})

    def record_log(self, job_id: str, chunk: bytes) -> None:
        self._append({"t": "log", "k": job_id, "b64": base64.b64encode(chunk).decode("ascii")})

    def _append(self, record: dict) -> None:
        if self._fh is None:
            return
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def load_journal(data_dir: str | Path | None) -> tuple[dict, dict]:
    """Replay a journal into (tables, job_logs).

    ``tables`` maps table name -> {key -> value dict}; ``job_logs`` maps
    job id -> bytearray. A missing directory or file yields empty state;
    an unreadable line raises CorruptDataDir.
    """
    tables: dict[str, dict[str, dict]] = {}
    logs: dict[str, bytearray] = {}
    if data_dir is None:
        return tables, logs
    path = Path(data_dir) / JOURNAL_NAME
    if not path.exists():
        return tables, logs
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                kind = record["t"]
                if kind == "put":
                    tables.setdefault(record["tab"], {})[record["k"]] = record["v"]
                elif kind == "del":
                    tables.get(record["tab"], {}).pop(record["k"], None)
                elif kind == "log":
                    logs.setdefault(record["k"], bytearray()).extend(
                        base64.b64decode(record["b64"])
                    )
                else:
                    raise ValueError(f"unknown record type {kind!r}")
            except (ValueError, KeyError, TypeError) as exc:
                raise CorruptDataDir(f"{path}:{lineno}: {exc}") from exc
    return tables, logs
