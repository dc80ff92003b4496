"""Graph-backed attribute-based access control.

Users, teams, and resources are nodes; ownership, team membership, and
grants are labelled edges. Decisions are deny-by-default: access is allowed
only when the graph contains an ownership edge, a direct grant, a grant to
a team the user belongs to, or a grant to the distinguished community node
(which stands for "all users"). Every allow carries a trace of the edge
path(s) that justified it.

Authentication is a thin salted-hash credential store issuing opaque
expiring bearer tokens; the clock is injectable so expiry is testable.
"""

from __future__ import annotations

import hashlib
import secrets
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import (
    BadCredentials,
    DuplicateNode,
    EmptyActionSet,
    ExpiredToken,
    KindMismatch,
    NotOwner,
    NotTeamOwner,
    UnknownNode,
)

ACTIONS = ("read", "write", "delete", "execute")

COMMUNITY_ID = "community"

_PBKDF2_ITERATIONS = 20_000


class NodeKind(str, Enum):
    USER = "user"
    TEAM = "team"
    RESOURCE = "resource"
    COMMUNITY = "community"


class EdgeLabel(str, Enum):
    MEMBER_OF = "MEMBER_OF"
    OWNS = "OWNS"
    GRANTED = "GRANTED"


@dataclass
class GraphNode:
    node_id: str
    kind: NodeKind
    attributes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"node_id": self.node_id, "kind": self.kind.value, "attributes": self.attributes}

    @classmethod
    def from_dict(cls, d: dict) -> "GraphNode":
        return cls(d["node_id"], NodeKind(d["kind"]), d.get("attributes", {}))


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    label: EdgeLabel
    actions: frozenset = frozenset()

    @property
    def key(self) -> str:
        return f"{self.src}|{self.label.value}|{self.dst}"

    def to_dict(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "label": self.label.value,
            "actions": sorted(self.actions),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GraphEdge":
        return cls(d["src"], d["dst"], EdgeLabel(d["label"]), frozenset(d.get("actions", [])))


@dataclass
class AccessDecision:
    """Outcome of a policy check: allowed iff at least one justifying path."""

    allowed: bool
    trace: list = field(default_factory=list)  # list of paths; a path is a list of GraphEdge

    def to_dict(self) -> dict:
        return {
            "allowed": self.allowed,
            "trace": [[e.to_dict() for e in path] for path in self.trace],
        }


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:8]}"


class AccessGraph:
    """Adjacency store plus the decision procedure over it.

    Mutations are reflected into the optional journal; reads never touch it.
    Not internally synchronized — callers serialize mutations.
    """

    def __init__(self, clock: Callable[[], float] = time.time, token_ttl: float = 86400.0, journal=None):
        self._clock = clock
        self._token_ttl = token_ttl
        self._journal = journal
        self.nodes: dict[str, GraphNode] = {}
        self.edges: dict[str, GraphEdge] = {}
        self._teams_of: dict[str, set[str]] = {}  # user -> teams (MEMBER_OF index)
        self._credentials: dict[str, dict] = {}  # username -> {user_id, salt, digest}
        self._tokens: dict[str, dict] = {}  # token -> {user_id, expires_at}
        self._ensure_community()

    def _ensure_community(self) -> None:
        if COMMUNITY_ID not in self.nodes:
            self._put_node(GraphNode(COMMUNITY_ID, NodeKind.COMMUNITY, {"name": "all users"}))

    # -- persistence hooks -------------------------------------------------

    def _put_node(self, node: GraphNode) -> None:
        self.nodes[node.node_id] = node
        if self._journal:
            self._journal.record_put("nodes", node.node_id, node.to_dict())

    def _put_edge(self, edge: GraphEdge) -> None:
        self.edges[edge.key] = edge
        if edge.label is EdgeLabel.MEMBER_OF:
            self._teams_of.setdefault(edge.src, set()).add(edge.dst)
        if self._journal:
            self._journal.record_put("edges", edge.key, edge.to_dict())

    def _del_edge(self, key: str) -> None:
        edge = self.edges.pop(key, None)
        if edge is None:
            return
        if edge.label is EdgeLabel.MEMBER_OF:
            self._teams_of.get(edge.src, set()).discard(edge.dst)
        if self._journal:
            self._journal.record_del("edges", key)

    def restore(self, tables: dict) -> None:
        """Rebuild graph state from journal tables (replaces current state)."""
        self.nodes = {}
        self.edges = {}
        self._teams_of = {}
        journal, self._journal = self._journal, None
        try:
            for raw in tables.get("nodes", {}).values():
                self._put_node(GraphNode.from_dict(raw))
            for raw in tables.get("edges", {}).values():
                self._put_edge(GraphEdge.from_dict(raw))
            self._credentials = dict(tables.get("credentials", {}))
            self._tokens = dict(tables.get("tokens", {}))
            self._ensure_community()
        finally:
            self._journal = journal

    # -- node management ---------------------------------------------------

    def _require(self, node_id: str, kind: NodeKind | None = None) -> GraphNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(f"no such node: {node_id}")
        if kind is not None and node.kind is not kind:
            raise KindMismatch(f"{node_id} is a {node.kind.value}, expected {kind.value}")
        return node

    def create_user(self, attributes: dict | None = None, node_id: str | None = None) -> GraphNode:
        return self._create(NodeKind.USER, "u", attributes, node_id)

    def create_resource(self, node_id: str, attributes: dict | None = None) -> GraphNode:
        return self._create(NodeKind.RESOURCE, "r", attributes, node_id)

    def create_team(
        self, owner_user: str, attributes: dict | None = None, node_id: str | None = None
    ) -> GraphNode:
        self._require(owner_user, NodeKind.USER)
        attributes = dict(attributes or {})
        attributes["owner"] = owner_user
        return self._create(NodeKind.TEAM, "t", attributes, node_id)

    def _create(self, kind: NodeKind, prefix: str, attributes: dict | None, node_id: str | None) -> GraphNode:
        node_id = node_id or _new_id(prefix)
        if node_id in self.nodes:
            raise DuplicateNode(f"node already exists: {node_id}")
        node = GraphNode(node_id, kind, dict(attributes or {}))
        self._put_node(node)
        return node

    def remove_resource(self, resource: str) -> None:
        """Drop a resource node and every edge touching it."""
        self._require(resource, NodeKind.RESOURCE)
        for key in [k for k, e in self.edges.items() if e.dst == resource or e.src == resource]:
            self._del_edge(key)
        del self.nodes[resource]
        if self._journal:
            self._journal.record_del("nodes", resource)

    # -- membership and ownership -------------------------------------------

    def add_member(self, team: str, user: str, principal: str) -> GraphEdge:
        team_node = self._require(team, NodeKind.TEAM)
        self._require(user, NodeKind.USER)
        if team_node.attributes.get("owner") != principal:
            raise NotTeamOwner(f"{principal} does not own team {team}")
        edge = GraphEdge(user, team, EdgeLabel.MEMBER_OF)
        if edge.key not in self.edges:
            self._put_edge(edge)
        return self.edges[edge.key]

    def remove_member(self, team: str, user: str, principal: str) -> None:
        team_node = self._require(team, NodeKind.TEAM)
        self._require(user, NodeKind.USER)
        if team_node.attributes.get("owner") != principal:
            raise NotTeamOwner(f"{principal} does not own team {team}")
        self._del_edge(GraphEdge(user, team, EdgeLabel.MEMBER_OF).key)

    def set_owner(self, user: str, resource: str) -> GraphEdge:
        """Make ``user`` the (single) owner of ``resource``, replacing any prior owner."""
        self._require(user, NodeKind.USER)
        self._require(resource, NodeKind.RESOURCE)
        for key in [
            k
            for k, e in self.edges.items()
            if e.label is EdgeLabel.OWNS and e.dst == resource
        ]:
            self._del_edge(key)
        edge = GraphEdge(user, resource, EdgeLabel.OWNS)
        self._put_edge(edge)
        return edge

    def owner_of(self, resource: str) -> str | None:
        for e in self.edges.values():
            if e.label is EdgeLabel.OWNS and e.dst == resource:
                return e.src
        return None

    # -- grants --------------------------------------------------------------

    def grant(self, principal: str, subject: str, actions, resource: str) -> GraphEdge:
        """Grant ``actions`` on ``resource`` to a user, team, or the community.

        Only the resource owner may grant. Repeated grants merge action sets.
        """
        actions = frozenset(actions)
        if not actions:
            raise EmptyActionSet("grant requires at least one action")
        unknown = actions - set(ACTIONS)
        if unknown:
            raise ValueError(f"unknown actions: {sorted(unknown)}")
        subject_node = self._require(subject)
        if subject_node.kind is NodeKind.RESOURCE:
            raise KindMismatch("grants may target users, teams, or the community")
        self._require(resource, NodeKind.RESOURCE)
        if self.owner_of(resource) != principal:
            raise NotOwner(f"{principal} does not own {resource}")
        key = GraphEdge(subject, resource, EdgeLabel.GRANTED).key
        existing = self.edges.get(key)
        if existing is not None:
            actions = actions | existing.actions
        self._put_edge(GraphEdge(subject, resource, EdgeLabel.GRANTED, actions))
        return self.edges[key]

    def revoke(self, principal: str, subject: str, resource: str) -> None:
        """Remove the grant edge from ``subject`` to ``resource`` entirely."""
        self._require(subject)
        self._require(resource, NodeKind.RESOURCE)
        if self.owner_of(resource) != principal:
            raise NotOwner(f"{principal} does not own {resource}")
        self._del_edge(GraphEdge(subject, resource, EdgeLabel.GRANTED).key)

    # -- decisions -------------------------------------------------------------

    def check_access(self, user: str, action: str, resource: str) -> AccessDecision:
        """Deny-by-default decision with a trace of justifying paths.

        Allow iff the user owns the resource, holds a direct grant for the
        action, belongs to a team holding one, or the community holds one.
        Trace paths are ordered shortest first.
        """
        if action not in ACTIONS:
            raise ValueError(f"unknown action: {action}")
        self._require(user, NodeKind.USER)
        self._require(resource, NodeKind.RESOURCE)

        paths: list[list[GraphEdge]] = []
        owns = self.edges.get(GraphEdge(user, resource, EdgeLabel.OWNS).key)
        if owns is not None:
            paths.append([owns])
        direct = self.edges.get(GraphEdge(user, resource, EdgeLabel.GRANTED).key)
        if direct is not None and action in direct.actions:
            paths.append([direct])
        community = self.edges.get(GraphEdge(COMMUNITY_ID, resource, EdgeLabel.GRANTED).key)
        if community is not None and action in community.actions:
            paths.append([community])
        for team in sorted(self._teams_of.get(user, ())):
            membership = self.edges.get(GraphEdge(user, team, EdgeLabel.MEMBER_OF).key)
            team_grant = self.edges.get(GraphEdge(team, resource, EdgeLabel.GRANTED).key)
            if membership is not None and team_grant is not None and action in team_grant.actions:
                paths.append([membership, team_grant])
        paths.sort(key=len)
        return AccessDecision(allowed=bool(paths), trace=paths)

    def is_allowed(self, user: str, action: str, resource: str) -> bool:
        try:
            return self.check_access(user, action, resource).allowed
        except UnknownNode:
            return False

    # -- authentication ----------------------------------------------------------

    def has_username(self, username: str) -> bool:
        return username in self._credentials

    def set_credentials(self, user_id: str, username: str, secret: str) -> None:
        self._require(user_id, NodeKind.USER)
        existing = self._credentials.get(username)
        if existing is not None and existing["user_id"] != user_id:
            raise DuplicateNode(f"username already registered: {username}")
        salt = secrets.token_hex(8)
        record = {"user_id": user_id, "salt": salt, "digest": _digest(secret, salt)}
        self._credentials[username] = record
        if self._journal:
            self._journal.record_put("credentials", username, record)

    def authenticate(self, username: str, secret: str) -> str:
        """Exchange valid credentials for an opaque expiring bearer token."""
        record = self._credentials.get(username)
        if record is None or _digest(secret, record["salt"]) != record["digest"]:
            raise BadCredentials("bad username or secret")
        token = secrets.token_urlsafe(24)
        entry = {"user_id": record["user_id"], "expires_at": self._clock() + self._token_ttl}
        self._tokens[token] = entry
        if self._journal:
            self._journal.record_put("tokens", token, entry)
        return token

    def resolve_token(self, token: str) -> GraphNode:
        entry = self._tokens.get(token)
        if entry is None:
            raise BadCredentials("unknown token")
        if self._clock() >= entry["expires_at"]:
            del self._tokens[token]
            if self._journal:
                self._journal.record_del("tokens", token)
            raise ExpiredToken("token expired")
        return self._require(entry["user_id"], NodeKind.USER)


def _digest(secret: str, salt: str) -> str:
    return hashlib.pbkdf2_hmac(
        "sha256", secret.encode(), salt.encode(), _PBKDF2_ITERATIONS
    ).hex()
