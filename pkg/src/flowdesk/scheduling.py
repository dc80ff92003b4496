"""Supply-constrained worker-to-host allocation.

Pending workers ask for integral CPU/GPU counts; hosts advertise what they
have left. ``plan_allocations`` picks the largest set of workers that fits,
breaking ties toward the front of the queue (FIFO) and then toward the
lowest host id, so identical inputs always plan identically. The planner is
an exact branch-and-bound over the (small, desk-scale) instance space; no
external solver is involved.

State changes are modelled as pure transitions: ``commit_allocation`` and
``release_allocation`` return a new ``HostState`` and never mutate their
arguments. The caller owns serialization.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from dataclasses import dataclass, replace

from .errors import CapacityOverflow, InsufficientResources


@dataclass(frozen=True)
class ResourceRequest:
    """Integral CPU/GPU counts one worker needs for its whole lifetime."""

    cpu: int
    gpu: int

    def __post_init__(self):
        if self.cpu < 0 or self.gpu < 0:
            raise ValueError("resource counts must be nonnegative")
        if self.cpu + self.gpu < 1:
            raise ValueError("a worker must request at least one resource")


@dataclass(frozen=True)
class HostState:
    """Capacity and current availability of one registered host.

    Capacities are fixed at registration; availability moves between 0 and
    capacity as allocations are committed and released.
    """

    host_id: str
    cpu_capacity: int
    gpu_capacity: int
    cpu_available: int
    gpu_available: int

    def __post_init__(self):
        if self.cpu_capacity < 0 or self.gpu_capacity < 0:
            raise ValueError("capacities must be nonnegative")
        if not (0 <= self.cpu_available <= self.cpu_capacity):
            raise ValueError("cpu_available out of range")
        if not (0 <= self.gpu_available <= self.gpu_capacity):
            raise ValueError("gpu_available out of range")

    @classmethod
    def fresh(cls, host_id: str, cpu_capacity: int, gpu_capacity: int) -> "HostState":
        return cls(host_id, cpu_capacity, gpu_capacity, cpu_capacity, gpu_capacity)

    def fits(self, request: ResourceRequest) -> bool:
        return request.cpu <= self.cpu_available and request.gpu <= self.gpu_available


@dataclass(frozen=True)
class WorkerRequest:
    """One pending worker waiting for an allocation."""

    worker_id: str
    workflow_id: str
    request: ResourceRequest
    submit_seq: int


@dataclass(frozen=True)
class Allocation:
    """A grant of ``request`` on ``host_id`` to worker ``worker_id``."""

    worker_id: str
    host_id: str
    request: ResourceRequest


def plan_allocations(pending: list[WorkerRequest], hosts: list[HostState]) -> list[Allocation]:
    """Choose which pending workers to place, and where.

    The returned plan is feasible (per-host grants never exceed current
    availability), allocates each worker at most once, and among all
    feasible plans:

    1. allocates the maximum number of workers,
    2. prefers the plan whose allocated ``submit_seq`` multiset is
       lexicographically smallest (earlier submissions win ties),
    3. prefers the lowest ``host_id`` per worker, in queue order.

    Pure function; inputs are not mutated. Workers that fit nowhere are
    simply left out, so an empty plan is a valid result.

    Solved exactly in three lexicographic stages: find the maximum
    cardinality, then fix the worker set front-to-back with feasibility
    queries (include a worker iff the maximum stays reachable), then take
    the first feasible host assignment with hosts tried in ascending id
    order. Each stage is a depth-first search pruned by the total resource
    units still available, which keeps the common many-identical-workers
    queues cheap.
    """
    seqs = [w.submit_seq for w in pending]
    if seqs != sorted(seqs) or len(set(seqs)) != len(seqs):
        raise ValueError("pending queue must be sorted by unique submit_seq")

    ordered_hosts = sorted(hosts, key=lambda h: h.host_id)
    if len({h.host_id for h in ordered_hosts}) != len(ordered_hosts):
        raise ValueError("duplicate host_id in hosts")
    avail = [[h.cpu_available, h.gpu_available] for h in ordered_hosts]
    requests = [w.request for w in pending]

    bounds = _SuffixBounds([r.cpu + r.gpu for r in requests])
    best = _max_placeable(requests, avail, bounds, forced=[])
    if best == 0:
        return []

    decisions: list[bool] = []
    for _ in range(len(pending)):
        decisions.append(True)
        if _max_placeable(requests, avail, bounds, forced=decisions) < best:
            decisions[-1] = False

    chosen = [i for i, keep in enumerate(decisions) if keep]
    assignment = _first_assignment([requests[i] for i in chosen], avail)
    return [
        Allocation(pending[i].worker_id, ordered_hosts[h].host_id, pending[i].request)
        for i, h in zip(chosen, assignment)
    ]


class _SuffixBounds:
    """Upper bound on how many of requests[i:] can still fit in u free units.

    Built once per planning call: for each suffix, prefix sums of the sorted
    unit sizes. The bound ignores the cpu/gpu split and any forced skips,
    so it only ever overestimates — safe for pruning.
    """

    def __init__(self, sizes: list):
        self._sums: list = [None] * (len(sizes) + 1)
        self._sums[len(sizes)] = [0]
        ordered: list = []
        for i in range(len(sizes) - 1, -1, -1):
            insort(ordered, sizes[i])
            sums = [0]
            for size in ordered:
                sums.append(sums[-1] + size)
            self._sums[i] = sums

    def max_fit(self, i: int, units: int) -> int:
        return bisect_right(self._sums[i], units) - 1


def _max_placeable(requests: list, avail: list, bounds: _SuffixBounds, forced: list) -> int:
    """Largest number of workers placeable at once.

    ``forced`` pins the decision (include/skip) for a prefix of the queue;
    the rest is free. Forced-include workers that cannot be placed make the
    branch infeasible. Returns -1 when no arrangement satisfies ``forced``.

    Identical free workers are interchangeable, so the search only explores
    canonical solutions where, within one request shape, no skipped free
    worker precedes an included one. That keeps long homogeneous queues
    linear instead of exponential.
    """
    n = len(requests)
    best = -1
    target = len([f for f in forced if f]) + (n - len(forced))
    skipped_free: dict = {}  # request shape -> voluntary skips on current path
    host_floor: dict = {}  # request shape -> lowest host index the next include may use

    def descend(i: int, count: int, units: int) -> None:
        nonlocal best
        if best >= target:
            return  # cannot do better than placing every non-skipped worker
        if count + bounds.max_fit(i, units) <= best:
            return
        if i == n:
            best = max(best, count)
            return
        req = requests[i]
        shape = (req.cpu, req.gpu)
        pinned = forced[i] if i < len(forced) else None
        may_include = pinned is not False and not (
            pinned is None and skipped_free.get(shape)
        )
        if may_include:
            size = req.cpu + req.gpu
            prior_floor = host_floor.get(shape, 0)
            for h in range(prior_floor, len(avail)):
                slot = avail[h]
                if req.cpu <= slot[0] and req.gpu <= slot[1]:
                    slot[0] -= req.cpu
                    slot[1] -= req.gpu
                    host_floor[shape] = h
                    descend(i + 1, count + 1, units - size)
                    host_floor[shape] = prior_floor
                    slot[0] += req.cpu
                    slot[1] += req.gpu
                    if best >= target:
                        return
        if pinned is not True:
            if pinned is None:
                skipped_free[shape] = skipped_free.get(shape, 0) + 1
            descend(i + 1, count, units)
            if pinned is None:
                skipped_free[shape] -= 1

    descend(0, 0, sum(cpu + gpu for cpu, gpu in avail))
    return best


def _first_assignment(requests: list, avail: list) -> list:
    """Host indices for all requests, lexicographically smallest, by DFS.

    The lex-smallest assignment gives identical requests non-decreasing
    host indices (they are swappable), so the search never looks below the
    previous identical worker's host — symmetric branches collapse.
    """

    def place(i: int, floor: dict) -> list | None:
        if i == len(requests):
            return []
        req = requests[i]
        shape = (req.cpu, req.gpu)
        for h in range(floor.get(shape, 0), len(avail)):
            slot = avail[h]
            if req.cpu <= slot[0] and req.gpu <= slot[1]:
                slot[0] -= req.cpu
                slot[1] -= req.gpu
                rest = place(i + 1, {**floor, shape: h})
                slot[0] += req.cpu
                slot[1] += req.gpu
                if rest is not None:
                    return [h] + rest
        return None

    assignment = place(0, {})
    if assignment is None:
        raise RuntimeError("internal planner error: chosen set lost feasibility")
    return assignment


def commit_allocation(host: HostState, alloc: Allocation) -> HostState:
    """Realize a planned grant: availability drops by the granted amounts.

    Raises ``InsufficientResources`` when the grant no longer fits, which
    signals a stale plan; the caller must re-plan.
    """
    if alloc.host_id != host.host_id:
        raise ValueError(f"allocation targets host {alloc.host_id!r}, got {host.host_id!r}")
    if not host.fits(alloc.request):
        raise InsufficientResources(
            f"host {host.host_id}: need {alloc.request.cpu} cpu / {alloc.request.gpu} gpu, "
            f"have {host.cpu_available}/{host.gpu_available}"
        )
    return replace(
        host,
        cpu_available=host.cpu_available - alloc.request.cpu,
        gpu_available=host.gpu_available - alloc.request.gpu,
    )


def release_allocation(host: HostState, alloc: Allocation) -> HostState:
    """Return a committed grant to the host.

    Raises ``CapacityOverflow`` when the release would push availability
    past capacity — the signature of a double release — and refuses it.
    """
    if alloc.host_id != host.host_id:
        raise ValueError(f"allocation targets host {alloc.host_id!r}, got {host.host_id!r}")
    new_cpu = host.cpu_available + alloc.request.cpu
    new_gpu = host.gpu_available + alloc.request.gpu
    if new_cpu > host.cpu_capacity or new_gpu > host.gpu_capacity:
        raise CapacityOverflow(
            f"host {host.host_id}: releasing {alloc.request.cpu}/{alloc.request.gpu} "
            f"would exceed capacity {host.cpu_capacity}/{host.gpu_capacity}"
        )
    return replace(host, cpu_available=new_cpu, gpu_available=new_gpu)
