"""Central platform core: workflows, jobs, workers, hosts, logs, and assets.

One ``PlatformCore`` instance owns all mutable state and serializes every
operation through a single re-entrant lock, so each API call is atomic and
readers always see consistent snapshots. Launcher agents and workers are
separate actors that interact only through these methods (directly
in-process, or via the HTTP layer in ``server``).

Lifecycle summary: a submitted workflow is validated, its jobs are dealt to
workers in topological order, and the workers queue for host allocations.
Hosts poll to pick up pending workers; each worker pulls its next ready job,
streams logs, reports a terminal state, and finally releases its grant back
to the host. Cancellation flags running jobs and sweeps everything queued.
"""

from __future__ import annotations

import heapq
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .access import AccessGraph
from .errors import (
    AccessDenied,
    CyclicDependency,
    DuplicateHost,
    IllegalTransition,
    InvalidWorkerCount,
    NotLaunchable,
    SchemaViolation,
    UnknownDependency,
    UnknownHost,
    UnknownJob,
    UnknownWorker,
    UnknownWorkflow,
    WorkerBusy,
)
from .journal import Journal, load_journal
from .registry import ContentRegistry
from .scheduling import (
    Allocation,
    HostState,
    ResourceRequest,
    WorkerRequest,
    commit_allocation,
    plan_allocations,
    release_allocation,
)

RUNNER_KINDS = ("process", "mock")

_JOB_ID_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


class JobState(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"
    CANCELED = "CANCELED"


LEGAL_TRANSITIONS = {
    (JobState.QUEUED, JobState.RUNNING),
    (JobState.QUEUED, JobState.CANCELED),
    (JobState.RUNNING, JobState.COMPLETED),
    (JobState.RUNNING, JobState.FAILED),
    (JobState.RUNNING, JobState.CANCELED),
}

TERMINAL_STATES = (JobState.COMPLETED, JobState.FAILED, JobState.CANCELED)


class WorkerState(str, Enum):
    PENDING = "PENDING"
    LAUNCHED = "LAUNCHED"
    ACTIVE = "ACTIVE"
    TERMINATED = "TERMINATED"


@dataclass
class JobSpec:
    """One executable unit. ``job_id`` is globally unique (workflow-scoped
    ids are prefixed at admission); ``depends_on`` holds global ids too."""

    job_id: str
    name: str
    runner_kind: str
    command: list
    parameters: dict = field(default_factory=dict)
    depends_on: list = field(default_factory=list)
    output_uri: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "name": self.name,
            "runner_kind": self.runner_kind,
            "command": list(self.command),
            "parameters": dict(self.parameters),
            "depends_on": list(self.depends_on),
            "output_uri": self.output_uri,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        return cls(**d)


@dataclass
class JobRecord:
    spec: JobSpec
    workflow_id: str
    state: JobState = JobState.QUEUED
    worker_id: str | None = None
    assets: list = field(default_factory=list)
    started_at: float | None = None
    ended_at: float | None = None
    cancel_requested: bool = False

    def to_dict(self, log_size: int = 0) -> dict:
        d = self.spec.to_dict()
        d.update(
            {
                "workflow_id": self.workflow_id,
                "state": self.state.value,
                "worker_id": self.worker_id,
                "assets": list(self.assets),
                "started_at": self.started_at,
                "ended_at": self.ended_at,
                "cancel_requested": self.cancel_requested,
                "log_size": log_size,
            }
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "JobRecord":
        spec = JobSpec(
            job_id=d["job_id"],
            name=d["name"],
            runner_kind=d["runner_kind"],
            command=d["command"],
            parameters=d["parameters"],
            depends_on=d["depends_on"],
            output_uri=d["output_uri"],
        )
        return cls(
            spec=spec,
            workflow_id=d["workflow_id"],
            state=JobState(d["state"]),
            worker_id=d["worker_id"],
            assets=list(d["assets"]),
            started_at=d["started_at"],
            ended_at=d["ended_at"],
            cancel_requested=d["cancel_requested"],
        )


@dataclass
class WorkflowRecord:
    workflow_id: str
    owner: str
    name: str
    num_workers: int
    worker_request: ResourceRequest
    created_at: float
    job_ids: list
    cancel_requested: bool = False

    def to_dict(self) -> dict:
        return {
            "workflow_id": self.workflow_id,
            "owner": self.owner,
            "name": self.name,
            "num_workers": self.num_workers,
            "worker_request": {"cpu": self.worker_request.cpu, "gpu": self.worker_request.gpu},
            "created_at": self.created_at,
            "job_ids": list(self.job_ids),
            "cancel_requested": self.cancel_requested,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorkflowRecord":
        return cls(
            workflow_id=d["workflow_id"],
            owner=d["owner"],
            name=d["name"],
            num_workers=d["num_workers"],
            worker_request=ResourceRequest(**d["worker_request"]),
            created_at=d["created_at"],
            job_ids=list(d["job_ids"]),
            cancel_requested=d["cancel_requested"],
        )


@dataclass
class WorkerRecord:
    worker_id: str
    workflow_id: str
    assigned_jobs: list
    state: WorkerState = WorkerState.PENDING
    host_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "worker_id": self.worker_id,
            "workflow_id": self.workflow_id,
            "assigned_jobs": list(self.assigned_jobs),
            "state": self.state.value,
            "host_id": self.host_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorkerRecord":
        return cls(
            worker_id=d["worker_id"],
            workflow_id=d["workflow_id"],
            assigned_jobs=list(d["assigned_jobs"]),
            state=WorkerState(d["state"]),
            host_id=d["host_id"],
        )


@dataclass
class NextAction:
    """Answer to a worker asking for work: a job, a wait hint, or done."""

    kind: str  # "job" | "wait" | "done"
    job: JobRecord | None = None


def topological_order(job_ids: list, deps: dict) -> list:
    """One fixed topological order: ready jobs leave in submission order.

    ``deps`` maps job id -> list of dependency ids. Raises CyclicDependency
    naming one cycle when the graph is not a DAG.
    """
    position = {job_id: i for i, job_id in enumerate(job_ids)}
    remaining = {job_id: set(d) for job_id, d in deps.items()}
    dependents: dict[str, list] = {job_id: [] for job_id in job_ids}
    for job_id, dset in remaining.items():
        for dep in dset:
            dependents[dep].append(job_id)
    ready = [position[j] for j, dset in remaining.items() if not dset]
    heapq.heapify(ready)
    order = []
    while ready:
        job_id = job_ids[heapq.heappop(ready)]
        order.append(job_id)
        for dependent in dependents[job_id]:
            remaining[dependent].discard(job_id)
            if not remaining[dependent]:
                heapq.heappush(ready, position[dependent])
    if len(order) != len(job_ids):
        cycle = _find_cycle({j: d for j, d in deps.items() if j not in set(order)})
        raise CyclicDependency(f"dependency cycle: {' -> '.join(cycle)}")
    return order


def _find_cycle(deps: dict) -> list:
    """Walk depth-first until a node repeats; returns the cycle path."""
    seen_path: list = []
    on_path = set()

    def walk(node):
        if node in on_path:
            return seen_path[seen_path.index(node):] + [node]
        seen_path.append(node)
        on_path.add(node)
        for dep in deps.get(node, ()):
            if dep in deps:
                found = walk(dep)
                if found:
                    return found
        seen_path.pop()
        on_path.discard(node)
        return None

    for start in deps:
        found = walk(start)
        if found:
            return found
    return ["<unknown>"]


def partition_jobs(ordered_job_ids: list, num_workers: int) -> list:
    """Deal topologically ordered jobs round-robin across workers.

    Worker ``i`` gets positions i, i+num_workers, ... so each worker's list
    preserves the global topological order.
    """
    return [ordered_job_ids[i::num_workers] for i in range(num_workers)]


class PlatformCore:
    """The authoritative store plus every compute-API operation.

    ``data_dir=None`` runs fully in memory (the test mode); otherwise all
    mutations are journaled to the data directory and replayed on startup.
    """

    def __init__(
        self,
        data_dir: str | None = None,
        clock: Callable[[], float] = time.time,
        token_ttl: float = 86400.0,
    ):
        self._lock = threading.RLock()
        self._clock = clock
        tables, logs = load_journal(data_dir)
        self.journal = Journal(data_dir)
        self.access = AccessGraph(clock=clock, token_ttl=token_ttl, journal=self.journal)
        self.registry = ContentRegistry(self.access, journal=self.journal)

        self.hosts: dict[str, HostState] = {}
        self.workflows: dict[str, WorkflowRecord] = {}
        self.jobs: dict[str, JobRecord] = {}
        self.workers: dict[str, WorkerRecord] = {}
        self.allocations: dict[str, Allocation] = {}
        self.pending: list[WorkerRequest] = []
        self.logs: dict[str, bytearray] = {}
        self.events: list[dict] = []  # append-only transition audit, in-memory only
        self._submit_seq = 0
        self._restore(tables, logs)

    @property
    def lock(self) -> threading.RLock:
        """Mutation lock; hold it when composing multi-step graph updates."""
        return self._lock

    # -- persistence ---------------------------------------------------------

    def _restore(self, tables: dict, logs: dict) -> None:
        self.access.restore(tables)
        self.registry.restore(tables)
        for raw in tables.get("hosts", {}).values():
            self.hosts[raw["host_id"]] = HostState(**raw)
        for raw in tables.get("workflows", {}).values():
            self.workflows[raw["workflow_id"]] = WorkflowRecord.from_dict(raw)
        for raw in tables.get("jobs", {}).values():
            self.jobs[raw["job_id"]] = JobRecord.from_dict(raw)
        for raw in tables.get("workers", {}).values():
            self.workers[raw["worker_id"]] = WorkerRecord.from_dict(raw)
        for raw in tables.get("allocations", {}).values():
            self.allocations[raw["worker_id"]] = Allocation(
                raw["worker_id"], raw["host_id"], ResourceRequest(raw["cpu"], raw["gpu"])
            )
        queue = [
            WorkerRequest(
                raw["worker_id"],
                raw["workflow_id"],
                ResourceRequest(raw["cpu"], raw["gpu"]),
                raw["submit_seq"],
            )
            for raw in tables.get("queue", {}).values()
        ]
        self.pending = sorted(queue, key=lambda w: w.submit_seq)
        self._submit_seq = tables.get("counters", {}).get("submit_seq", {}).get("value", 0)
        self.logs = logs

    def close(self) -> None:
        self.journal.close()

    def _put_host(self, host: HostState) -> None:
        self.hosts[host.host_id] = host
        self.journal.record_put(
            "hosts",
            host.host_id,
            {
                "host_id": host.host_id,
                "cpu_capacity": host.cpu_capacity,
                "gpu_capacity": host.gpu_capacity,
                "cpu_available": host.cpu_available,
                "gpu_available": host.gpu_available,
            },
        )

    def _put_workflow(self, wf: WorkflowRecord) -> None:
        self.workflows[wf.workflow_id] = wf
        self.journal.record_put("workflows", wf.workflow_id, wf.to_dict())

    def _put_job(self, job: JobRecord) -> None:
        self.jobs[job.spec.job_id] = job
        self.journal.record_put("jobs", job.spec.job_id, job.to_dict())

    def _put_worker(self, worker: WorkerRecord) -> None:
        self.workers[worker.worker_id] = worker
        self.journal.record_put("workers", worker.worker_id, worker.to_dict())

    def _enqueue(self, request: WorkerRequest) -> None:
        self.pending.append(request)
        self.journal.record_put(
            "queue",
            request.worker_id,
            {
                "worker_id": request.worker_id,
                "workflow_id": request.workflow_id,
                "cpu": request.request.cpu,
                "gpu": request.request.gpu,
                "submit_seq": request.submit_seq,
            },
        )

    def _dequeue(self, worker_id: str) -> None:
        self.pending = [w for w in self.pending if w.worker_id != worker_id]
        self.journal.record_del("queue", worker_id)

    def _put_allocation(self, alloc: Allocation) -> None:
        self.allocations[alloc.worker_id] = alloc
        self.journal.record_put(
            "allocations",
            alloc.worker_id,
            {
                "worker_id": alloc.worker_id,
                "host_id": alloc.host_id,
                "cpu": alloc.request.cpu,
                "gpu": alloc.request.gpu,
            },
        )

    def _del_allocation(self, worker_id: str) -> None:
        self.allocations.pop(worker_id, None)
        self.journal.record_del("allocations", worker_id)

    def _next_seq(self) -> int:
        self._submit_seq += 1
        self.journal.record_put("counters", "submit_seq", {"value": self._submit_seq})
        return self._submit_seq

    # -- state machine ---------------------------------------------------------

    def _transition(self, job: JobRecord, new_state: JobState) -> None:
        if (job.state, new_state) not in LEGAL_TRANSITIONS:
            raise IllegalTransition(
                f"job {job.spec.job_id}: cannot move {job.state.value} -> {new_state.value}"
            )
        old = job.state
        job.state = new_state
        now = self._clock()
        if new_state is JobState.RUNNING:
            job.started_at = now
        if new_state in TERMINAL_STATES:
            job.ended_at = now
        self.events.append(
            {
                "seq": len(self.events),
                "job_id": job.spec.job_id,
                "from": old.value,
                "to": new_state.value,
                "at": now,
            }
        )
        self._put_job(job)

    # -- hosts -------------------------------------------------------------------

    def register_host(self, host_id: str, cpu_capacity: int, gpu_capacity: int) -> HostState:
        with self._lock:
            if host_id in self.hosts:
                raise DuplicateHost(f"host already registered: {host_id}")
            try:
                host = HostState.fresh(host_id, cpu_capacity, gpu_capacity)
            except ValueError as exc:
                raise SchemaViolation(str(exc)) from exc
            self._put_host(host)
            return host

    def list_hosts(self) -> list[HostState]:
        with self._lock:
            return [self.hosts[h] for h in sorted(self.hosts)]

    # -- submission -----------------------------------------------------------------

    def submit_workflow(self, body: dict, principal: str) -> str:
        """Validate and admit a workflow; returns its id.

        Jobs start QUEUED, the job list is partitioned across workers, and
        the workers join the scheduling queue.
        """
        with self._lock:
            self._require_user(principal)
            workflow_id = f"wf-{uuid.uuid4().hex[:8]}"
            specs, num_workers, request, name = _parse_workflow_body(body, workflow_id)

            order = topological_order(
                [s.job_id for s in specs], {s.job_id: s.depends_on for s in specs}
            )
            workflow = WorkflowRecord(
                workflow_id=workflow_id,
                owner=principal,
                name=name,
                num_workers=num_workers,
                worker_request=request,
                created_at=self._clock(),
                job_ids=[s.job_id for s in specs],
            )
            self.access.create_resource(workflow_id, {"name": name, "type": "workflow-run"})
            self.access.set_owner(principal, workflow_id)
            self._put_workflow(workflow)
            for spec in specs:
                self._put_job(JobRecord(spec=spec, workflow_id=workflow_id))
                self.logs.setdefault(spec.job_id, bytearray())
            for i, job_list in enumerate(partition_jobs(order, num_workers), start=1):
                worker = WorkerRecord(
                    worker_id=f"{workflow_id}.w{i}",
                    workflow_id=workflow_id,
                    assigned_jobs=job_list,
                )
                for job_id in job_list:
                    job = self.jobs[job_id]
                    job.worker_id = worker.worker_id
                    self._put_job(job)
                self._put_worker(worker)
                self._enqueue(
                    WorkerRequest(worker.worker_id, workflow_id, request, self._next_seq())
                )
            return workflow_id

    def _require_user(self, principal: str) -> None:
        node = self.access.nodes.get(principal)
        if node is None or node.kind.value != "user":
            raise AccessDenied(f"unknown principal: {principal}")

    # -- scheduling ---------------------------------------------------------------------

    def poll_allocations(self, host_id: str) -> list:
        """Plan against this host's current availability and commit the result.

        Returns launch descriptors for newly granted workers; each worker is
        marked LAUNCHED so a second poll never returns it again.
        """
        with self._lock:
            host = self.hosts.get(host_id)
            if host is None:
                raise UnknownHost(f"no such host: {host_id}")
            if not self.pending or host.cpu_available + host.gpu_available == 0:
                return []
            plan = plan_allocations(self.pending, [host])
            launches = []
            for alloc in plan:
                host = commit_allocation(host, alloc)
                self._put_allocation(alloc)
                self._dequeue(alloc.worker_id)
                worker = self.workers[alloc.worker_id]
                worker.state = WorkerState.LAUNCHED
                worker.host_id = host_id
                self._put_worker(worker)
                launches.append(
                    {
                        "worker_id": worker.worker_id,
                        "workflow_id": worker.workflow_id,
                        "assigned_jobs": list(worker.assigned_jobs),
                        "request": {"cpu": alloc.request.cpu, "gpu": alloc.request.gpu},
                    }
                )
            self._put_host(host)
            return launches

    # -- worker protocol --------------------------------------------------------------------

    def next_ready_job(self, worker_id: str) -> NextAction:
        """First assigned QUEUED job whose dependencies are all COMPLETED.

        Jobs whose dependencies failed or were canceled cascade to CANCELED
        here, before evaluation. The returned job is already RUNNING.
        """
        with self._lock:
            worker = self.workers.get(worker_id)
            if worker is None:
                raise UnknownWorker(f"no such worker: {worker_id}")
            if worker.state is WorkerState.TERMINATED:
                return NextAction("done")
            if worker.state is WorkerState.LAUNCHED:
                worker.state = WorkerState.ACTIVE
                self._put_worker(worker)
            blocked = False
            for job_id in worker.assigned_jobs:
                job = self.jobs[job_id]
                if job.state is not JobState.QUEUED:
                    continue
                dep_states = [self.jobs[d].state for d in job.spec.depends_on]
                if any(s in (JobState.FAILED, JobState.CANCELED) for s in dep_states):
                    self._transition(job, JobState.CANCELED)
                    continue
                if all(s is JobState.COMPLETED for s in dep_states):
                    self._transition(job, JobState.RUNNING)
                    return NextAction("job", job)
                blocked = True
            return NextAction("wait") if blocked else NextAction("done")

    def append_log(self, job_id: str, chunk: bytes) -> int:
        with self._lock:
            job = self._require_job(job_id)
            if job.state is not JobState.RUNNING:
                raise IllegalTransition(f"job {job_id} is {job.state.value}, not RUNNING")
            return self._append_log_unchecked(job_id, chunk)

    def _append_log_unchecked(self, job_id: str, chunk: bytes) -> int:
        log = self.logs.setdefault(job_id, bytearray())
        if chunk:
            log.extend(chunk)
            self.journal.record_log(job_id, bytes(chunk))
        return len(log)

    def report_job_status(
        self,
        job_id: str,
        new_state: JobState,
        log_chunk: bytes = b"",
        assets: list | None = None,
    ) -> JobRecord:
        """Terminal report from a worker: final log chunk, state, produced assets.

        Each asset entry ({uri, kind?, metadata?}) becomes an AssetRecord
        owned by the workflow owner and linked back to this job.
        """
        with self._lock:
            job = self._require_job(job_id)
            if new_state not in TERMINAL_STATES:
                raise IllegalTransition(f"reported state must be terminal, got {new_state.value}")
            if job.state is not JobState.RUNNING:
                raise IllegalTransition(f"job {job_id} is {job.state.value}, not RUNNING")
            normalized = [_normalize_asset_entry(entry) for entry in assets or []]
            self._append_log_unchecked(job_id, log_chunk)
            self._transition(job, new_state)
            owner = self.workflows[job.workflow_id].owner
            for entry in normalized:
                asset_id = self.registry.register_asset(
                    owner=owner,
                    kind=entry.get("kind", "job-output"),
                    uri=entry["uri"],
                    metadata=entry.get("metadata"),
                    source_job_id=job_id,
                )
                job.assets.append(asset_id)
            if assets:
                self._put_job(job)
            return job

    def worker_done(self, worker_id: str) -> WorkerRecord:
        """Self-termination: requires every assigned job resolved; idempotent."""
        with self._lock:
            worker = self.workers.get(worker_id)
            if worker is None:
                raise UnknownWorker(f"no such worker: {worker_id}")
            if worker.state is WorkerState.TERMINATED:
                return worker
            busy = [
                j
                for j in worker.assigned_jobs
                if self.jobs[j].state in (JobState.QUEUED, JobState.RUNNING)
            ]
            if busy:
                raise WorkerBusy(f"worker {worker_id} still has unfinished jobs: {busy}")
            self._terminate_worker(worker)
            return worker

    def _terminate_worker(self, worker: WorkerRecord) -> None:
        worker.state = WorkerState.TERMINATED
        self._put_worker(worker)
        alloc = self.allocations.get(worker.worker_id)
        if alloc is not None:
            self._put_host(release_allocation(self.hosts[alloc.host_id], alloc))
            self._del_allocation(worker.worker_id)

    # -- cancellation ------------------------------------------------------------------------

    def cancel_workflow(self, workflow_id: str, principal: str) -> None:
        """Sweep QUEUED jobs to CANCELED, flag RUNNING ones, drop queued workers.

        Workers actively executing observe the flag on their next check and
        kill their runner; launched-but-idle workers are reaped here.
        """
        with self._lock:
            workflow = self.workflows.get(workflow_id)
            if workflow is None:
                raise UnknownWorkflow(f"no such workflow: {workflow_id}")
            if not self.access.is_allowed(principal, "execute", workflow_id):
                raise AccessDenied(f"{principal} may not cancel {workflow_id}")
            workflow.cancel_requested = True
            self._put_workflow(workflow)
            for job_id in workflow.job_ids:
                job = self.jobs[job_id]
                if job.state is JobState.QUEUED:
                    self._transition(job, JobState.CANCELED)
                elif job.state is JobState.RUNNING:
                    job.cancel_requested = True
                    self._put_job(job)
            for worker in self.workers.values():
                if worker.workflow_id != workflow_id:
                    continue
                if worker.state is WorkerState.PENDING:
                    self._dequeue(worker.worker_id)
                    self._terminate_worker(worker)
                elif worker.state is WorkerState.LAUNCHED:
                    # Launched but not yet active: either the launcher died
                    # after polling or the worker has not called in yet. Reap
                    # the grant; a live worker will see TERMINATED -> done.
                    self._terminate_worker(worker)

    # -- queries -------------------------------------------------------------------------------

    def _require_job(self, job_id: str) -> JobRecord:
        job = self.jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no such job: {job_id}")
        return job

    def get_job(self, job_id: str) -> JobRecord:
        with self._lock:
            return self._require_job(job_id)

    def job_dict(self, job: JobRecord) -> dict:
        d = job.to_dict(log_size=len(self.logs.get(job.spec.job_id, b"")))
        workflow = self.workflows.get(job.workflow_id)
        d["workflow_cancel_requested"] = bool(workflow and workflow.cancel_requested)
        return d

    def list_jobs(self, workflow_id: str | None = None, state: JobState | None = None) -> list:
        with self._lock:
            if workflow_id is not None and workflow_id not in self.workflows:
                raise UnknownWorkflow(f"no such workflow: {workflow_id}")
            return [
                job
                for job in self.jobs.values()
                if (workflow_id is None or job.workflow_id == workflow_id)
                and (state is None or job.state is state)
            ]

    def get_logs(self, job_id: str, from_offset: int = 0) -> bytes:
        with self._lock:
            self._require_job(job_id)
            data = self.logs.get(job_id, bytearray())
            return bytes(data[from_offset:])

    def get_workflow(self, workflow_id: str) -> WorkflowRecord:
        with self._lock:
            workflow = self.workflows.get(workflow_id)
            if workflow is None:
                raise UnknownWorkflow(f"no such workflow: {workflow_id}")
            return workflow

    def get_worker(self, worker_id: str) -> WorkerRecord:
        with self._lock:
            worker = self.workers.get(worker_id)
            if worker is None:
                raise UnknownWorker(f"no such worker: {worker_id}")
            return worker

    def resource_ledger(self) -> dict:
        """Per-host (capacity, available, granted) snapshot for audits."""
        with self._lock:
            granted: dict[str, list] = {h: [0, 0] for h in self.hosts}
            for alloc in self.allocations.values():
                granted[alloc.host_id][0] += alloc.request.cpu
                granted[alloc.host_id][1] += alloc.request.gpu
            return {
                host_id: {
                    "cpu_capacity": host.cpu_capacity,
                    "gpu_capacity": host.gpu_capacity,
                    "cpu_available": host.cpu_available,
                    "gpu_available": host.gpu_available,
                    "cpu_granted": granted[host_id][0],
                    "gpu_granted": granted[host_id][1],
                }
                for host_id, host in self.hosts.items()
            }

    # -- registry bridge ---------------------------------------------------------------------

    def launch_service(
        self, content_id: str, principal: str, runner_kind: str = "process"
    ) -> str:
        """Run a launchable app as a single-job workflow on behalf of principal."""
        with self._lock:
            doc = self.registry.get_content(content_id, principal)
            if doc.content_type != "app" or not doc.service:
                raise NotLaunchable(f"{content_id} is not a launchable app")
            if not self.access.is_allowed(principal, "execute", content_id):
                raise AccessDenied(f"{principal} may not execute {content_id}")
            body = {
                "name": f"service: {doc.name}",
                "jobs": [
                    {
                        "job_id": "serve",
                        "name": doc.name,
                        "runner_kind": runner_kind,
                        "command": list(doc.service["command"]),
                        "parameters": {"port_hint": doc.service.get("port")}
                        if doc.service.get("port") is not None
                        else {},
                    }
                ],
                "num_workers": 1,
                "worker_request": {"cpu": 1, "gpu": 0},
            }
            return self.submit_workflow(body, principal)


def _normalize_asset_entry(entry) -> dict:
    """Validate a reported asset before any state changes happen."""
    if isinstance(entry, str):
        entry = {"uri": entry}
    if not isinstance(entry, dict) or not isinstance(entry.get("uri"), str) or not entry["uri"]:
        raise SchemaViolation("asset entries must be a uri string or an object with a uri")
    if "kind" in entry and (not isinstance(entry["kind"], str) or not entry["kind"]):
        raise SchemaViolation("asset kind must be a non-empty string")
    if entry.get("metadata") is not None and not isinstance(entry["metadata"], dict):
        raise SchemaViolation("asset metadata must be an object")
    return entry


def _parse_workflow_body(body: dict, workflow_id: str):
    """Validate a submission body; returns (job specs, num_workers, request, name).

    Job ids are globalized to ``<workflow_id>.<local id>`` here, including
    inside depends_on lists.
    """
    if not isinstance(body, dict):
        raise SchemaViolation("workflow must be a JSON object")
    unknown = set(body) - {"name", "jobs", "num_workers", "worker_request"}
    if unknown:
        raise SchemaViolation(f"unknown workflow key {sorted(unknown)[0]!r}")
    jobs_raw = body.get("jobs")
    if not isinstance(jobs_raw, list) or not jobs_raw:
        raise SchemaViolation("workflow requires a non-empty jobs list")

    num_workers = body.get("num_workers", 1)
    if not isinstance(num_workers, int) or isinstance(num_workers, bool):
        raise InvalidWorkerCount("num_workers must be an integer")
    if not (1 <= num_workers <= len(jobs_raw)):
        raise InvalidWorkerCount(
            f"num_workers must be between 1 and the number of jobs ({len(jobs_raw)}), "
            f"got {num_workers}"
        )

    request_raw = body.get("worker_request", {"cpu": 1, "gpu": 0})
    if not isinstance(request_raw, dict) or set(request_raw) - {"cpu", "gpu"}:
        raise SchemaViolation("worker_request must be an object with cpu/gpu")
    try:
        request = ResourceRequest(int(request_raw.get("cpu", 0)), int(request_raw.get("gpu", 0)))
    except (ValueError, TypeError) as exc:
        raise SchemaViolation(f"bad worker_request: {exc}") from exc

    local_ids = []
    specs = []
    for raw in jobs_raw:
        if not isinstance(raw, dict):
            raise SchemaViolation("job entry must be an object")
        unknown = set(raw) - {
            "job_id",
            "name",
            "runner_kind",
            "command",
            "parameters",
            "depends_on",
            "output_uri",
        }
        if unknown:
            raise SchemaViolation(f"unknown job key {sorted(unknown)[0]!r}")
        local_id = raw.get("job_id")
        if not isinstance(local_id, str) or not local_id or not set(local_id) <= _JOB_ID_CHARS:
            raise SchemaViolation("job_id must be a non-empty [A-Za-z0-9_-] string")
        if local_id in local_ids:
            raise SchemaViolation(f"duplicate job_id {local_id!r}")
        local_ids.append(local_id)
        runner_kind = raw.get("runner_kind", "process")
        if runner_kind not in RUNNER_KINDS:
            raise SchemaViolation(f"unknown runner_kind {runner_kind!r}")
        command = raw.get("command")
        if not isinstance(command, list) or not all(isinstance(c, str) for c in command):
            raise SchemaViolation(f"job {local_id!r}: command must be a list of strings")
        parameters = raw.get("parameters", {})
        if not isinstance(parameters, dict):
            raise SchemaViolation(f"job {local_id!r}: parameters must be an object")
        depends_on = raw.get("depends_on", [])
        if not isinstance(depends_on, list) or not all(isinstance(d, str) for d in depends_on):
            raise SchemaViolation(f"job {local_id!r}: depends_on must be a list of job ids")
        output_uri = raw.get("output_uri")
        if output_uri is not None and not isinstance(output_uri, str):
            raise SchemaViolation(f"job {local_id!r}: output_uri must be a string")
        specs.append(
            JobSpec(
                job_id=local_id,
                name=raw.get("name", local_id),
                runner_kind=runner_kind,
                command=list(command),
                parameters=dict(parameters),
                depends_on=list(depends_on),
                output_uri=output_uri,
            )
        )

    for spec in specs:
        for dep in spec.depends_on:
            if dep not in local_ids:
                raise UnknownDependency(f"job {spec.job_id!r} depends on unknown job {dep!r}")
        if spec.job_id in spec.depends_on:
            raise CyclicDependency(f"dependency cycle: {spec.job_id} -> {spec.job_id}")
        if len(set(spec.depends_on)) != len(spec.depends_on):
            raise SchemaViolation(f"job {spec.job_id!r}: duplicate entries in depends_on")

    for spec in specs:
        spec.job_id = f"{workflow_id}.{spec.job_id}"
        spec.depends_on = [f"{workflow_id}.{d}" for d in spec.depends_on]

    name = body.get("name", "")
    if not isinstance(name, str):
        raise SchemaViolation("workflow name must be a string")
    return specs, num_workers, request, name or f"workflow {workflow_id}"
