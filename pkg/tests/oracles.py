"""Independent brute-force reference implementations used to cross-check
the production code. These deliberately share no logic with the package:
they enumerate the full solution space and apply the documented preference
rules directly.
"""

from __future__ import annotations

from flowdesk.scheduling import Allocation, HostState, WorkerRequest


def brute_force_plan(pending: list[WorkerRequest], hosts: list[HostState]) -> list[Allocation]:
    """Exhaustive reference for plan_allocations.

    Enumerates every subset of the pending queue in preference order
    (largest first, then lexicographically smallest submit_seq tuple) and
    returns the first subset that admits a feasible host assignment. The
    assignment itself is the depth-first one with hosts tried in ascending
    host_id order, which is the lexicographically smallest host vector.
    """
    ordered_hosts = sorted(hosts, key=lambda h: h.host_id)
    n = len(pending)

    masks = sorted(
        range(1 << n),
        key=lambda m: (
            -bin(m).count("1"),
            tuple(pending[i].submit_seq for i in range(n) if m >> i & 1),
        ),
    )
    for mask in masks:
        chosen = [pending[i] for i in range(n) if mask >> i & 1]
        assignment = _first_feasible_assignment(chosen, ordered_hosts)
        if assignment is not None:
            return [
                Allocation(w.worker_id, host_id, w.request)
                for w, host_id in zip(chosen, assignment)
            ]
    return []


def _first_feasible_assignment(
    chosen: list[WorkerRequest], ordered_hosts: list[HostState]
) -> list[str] | None:
    """First (host-lex smallest) feasible assignment of all chosen workers."""
    avail = {h.host_id: [h.cpu_available, h.gpu_available] for h in ordered_hosts}

    def place(i: int) -> list[str] | None:
        if i == len(chosen):
            return []
        req = chosen[i].request
        for h in ordered_hosts:
            a = avail[h.host_id]
            if req.cpu <= a[0] and req.gpu <= a[1]:
                a[0] -= req.cpu
                a[1] -= req.gpu
                rest = place(i + 1)
                a[0] += req.cpu
                a[1] += req.gpu
                if rest is not None:
                    return [h.host_id] + rest
        return None

    return place(0)


def brute_force_access(
    nodes: dict[str, str],
    edges: list[tuple[str, str, str, frozenset[str]]],
    user: str,
    action: str,
    resource: str,
    community_id: str,
) -> bool:
    """Reference decision procedure: scan the raw edge list for each rule.

    ``nodes`` maps node_id -> kind; ``edges`` holds (src, label, dst,
    actions) tuples. Mirrors the documented allow rules (ownership, direct
    grant, team grant via membership, community grant) and nothing else.
    """
    for src, label, dst, _actions in edges:
        if label == "OWNS" and src == user and dst == resource:
            return True
    for src, label, dst, actions in edges:
        if label == "GRANTED" and src == user and dst == resource and action in actions:
            return True
    for src, label, dst, _actions in edges:
        if label == "MEMBER_OF" and src == user:
            team = dst
            for s2, l2, d2, a2 in edges:
                if l2 == "GRANTED" and s2 == team and d2 == resource and action in a2:
                    return True
    for src, label, dst, actions in edges:
        if label == "GRANTED" and src == community_id and dst == resource and action in actions:
            return True
    return False


def naive_search(
    docs: list[tuple[str, str, str, list[str]]], query: str
) -> list[tuple[str, int]]:
    """Reference search scoring: (content_id, score) by direct rescan.

    ``docs`` holds (content_id, name, description, tags). Token sets come
    from lowercased splits on non-alphanumeric characters; the score is the
    number of distinct query tokens present in the document's token set.
    Zero scores are dropped; ordering is score desc, then name asc.
    """

    def tokens(text: str) -> set[str]:
        out, cur = set(), []
        for ch in text.lower():
            if ch.isalnum():
                cur.append(ch)
            elif cur:
                out.add("".join(cur))
                cur = []
        if cur:
            out.add("".join(cur))
        return out

    qtokens = tokens(query)
    scored = []
    for content_id, name, description, tags in docs:
        doc_tokens = tokens(name) | tokens(description)
        for tag in tags:
            doc_tokens |= tokens(tag)
        score = len(qtokens & doc_tokens)
        if score > 0:
            scored.append((content_id, score, name))
    scored.sort(key=lambda t: (-t[1], t[2]))
    return [(cid, score) for cid, score, _name in scored]
