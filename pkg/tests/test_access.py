"""Access graph tests: operations, decision table, oracle equivalence, auth."""

import random

import pytest

from flowdesk.access import ACTIONS, COMMUNITY_ID, AccessGraph, EdgeLabel, NodeKind
from flowdesk.errors import (
    BadCredentials,
    DuplicateNode,
    EmptyActionSet,
    ExpiredToken,
    KindMismatch,
    NotOwner,
    NotTeamOwner,
    UnknownNode,
)

from .oracles import brute_force_access


@pytest.fixture
def graph():
    return AccessGraph()


def make_basic(graph):
    owner = graph.create_user({"name": "owner"}).node_id
    member = graph.create_user({"name": "member"}).node_id
    stranger = graph.create_user({"name": "stranger"}).node_id
    team = graph.create_team(owner, {"name": "team"}).node_id
    graph.add_member(team, member, principal=owner)
    resource = graph.create_resource("res-1").node_id
    graph.set_owner(owner, resource)
    return owner, member, stranger, team, resource


class TestGraphOps:
    def test_add_member_idempotent(self, graph):
        owner, member, _, team, _ = make_basic(graph)
        graph.add_member(team, member, principal=owner)
        edges = [e for e in graph.edges.values() if e.label is EdgeLabel.MEMBER_OF]
        assert len(edges) == 1

    def test_non_owner_cannot_add_member(self, graph):
        owner, member, stranger, team, _ = make_basic(graph)
        with pytest.raises(NotTeamOwner):
            graph.add_member(team, stranger, principal=member)

    def test_set_owner_replaces(self, graph):
        owner, member, _, _, resource = make_basic(graph)
        graph.grant(owner, member, {"read"}, resource)
        graph.set_owner(member, resource)
        # the old owner keeps nothing implicit
        assert not graph.check_access(owner, "delete", resource).allowed
        assert graph.check_access(member, "delete", resource).allowed

    def test_owns_team_is_kind_mismatch(self, graph):
        owner, _, _, team, _ = make_basic(graph)
        with pytest.raises(KindMismatch):
            graph.set_owner(owner, team)

    def test_member_of_requires_user_to_team(self, graph):
        owner, _, _, team, resource = make_basic(graph)
        with pytest.raises(KindMismatch):
            graph.add_member(resource, owner, principal=owner)

    def test_grant_requires_owner(self, graph):
        _, member, stranger, _, resource = make_basic(graph)
        with pytest.raises(NotOwner):
            graph.grant(member, stranger, {"read"}, resource)

    def test_grant_requires_actions(self, graph):
        owner, member, _, _, resource = make_basic(graph)
        with pytest.raises(EmptyActionSet):
            graph.grant(owner, member, set(), resource)

    def test_grant_merges_actions(self, graph):
        owner, member, _, _, resource = make_basic(graph)
        graph.grant(owner, member, {"read"}, resource)
        graph.grant(owner, member, {"write"}, resource)
        assert graph.check_access(member, "read", resource).allowed
        assert graph.check_access(member, "write", resource).allowed

    def test_revoke_then_deny(self, graph):
        owner, member, _, _, resource = make_basic(graph)
        graph.grant(owner, member, {"read"}, resource)
        graph.revoke(owner, member, resource)
        assert not graph.check_access(member, "read", resource).allowed

    def test_unknown_node(self, graph):
        owner, *_ , resource = make_basic(graph)
        with pytest.raises(UnknownNode):
            graph.check_access("u-nope", "read", resource)
        with pytest.raises(UnknownNode):
            graph.check_access(owner, "read", "r-nope")

    def test_duplicate_node_id(self, graph):
        graph.create_resource("res-x")
        with pytest.raises(DuplicateNode):
            graph.create_resource("res-x")


class TestDecisionTable:
    """Owner / team member / stranger against participant, team, and
    community grants, across all four actions."""

    def test_twelve_cell_matrix(self, graph):
        owner, member, stranger, team, resource = make_basic(graph)
        graph.grant(owner, member, {"write"}, resource)  # participant grant
        graph.grant(owner, team, {"read"}, resource)  # team grant
        graph.grant(owner, COMMUNITY_ID, {"execute"}, resource)  # community grant

        expected = {
            (owner, "read"): True,
            (owner, "write"): True,
            (owner, "delete"): True,
            (owner, "execute"): True,
            (member, "read"): True,  # via team
            (member, "write"): True,  # via participant grant
            (member, "delete"): False,
            (member, "execute"): True,  # via community
            (stranger, "read"): False,
            (stranger, "write"): False,
            (stranger, "delete"): False,
            (stranger, "execute"): True,  # via community
        }
        edges = [(e.src, e.label.value, e.dst, e.actions) for e in graph.edges.values()]
        for (user, action), allowed in expected.items():
            decision = graph.check_access(user, action, resource)
            assert decision.allowed == allowed, (user, action)
            assert decision.allowed == bool(decision.trace)
            oracle = brute_force_access(
                {n: node.kind.value for n, node in graph.nodes.items()},
                edges,
                user,
                action,
                resource,
                COMMUNITY_ID,
            )
            assert decision.allowed == oracle, (user, action)

    def test_community_grant_covers_future_users(self, graph):
        owner, *_ , resource = make_basic(graph)
        graph.grant(owner, COMMUNITY_ID, {"read"}, resource)
        latecomer = graph.create_user({"name": "late"}).node_id
        assert graph.check_access(latecomer, "read", resource).allowed

    def test_trace_shapes(self, graph):
        owner, member, _, team, resource = make_basic(graph)
        graph.grant(owner, team, {"read"}, resource)
        decision = graph.check_access(member, "read", resource)
        assert len(decision.trace) == 1
        path = decision.trace[0]
        assert [e.label for e in path] == [EdgeLabel.MEMBER_OF, EdgeLabel.GRANTED]
        assert path[0].src == member and path[1].dst == resource

        owner_decision = graph.check_access(owner, "delete", resource)
        assert [e.label for e in owner_decision.trace[0]] == [EdgeLabel.OWNS]

    def test_traces_shortest_first(self, graph):
        owner, member, _, team, resource = make_basic(graph)
        graph.grant(owner, team, {"read"}, resource)
        graph.grant(owner, member, {"read"}, resource)
        decision = graph.check_access(member, "read", resource)
        assert len(decision.trace) == 2
        assert len(decision.trace[0]) == 1 and len(decision.trace[1]) == 2


def random_graph(rng: random.Random):
    graph = AccessGraph()
    users = [graph.create_user().node_id for _ in range(rng.randint(1, 6))]
    teams = []
    for _ in range(rng.randint(0, 3)):
        teams.append(graph.create_team(rng.choice(users)).node_id)
    resources = [
        graph.create_resource(f"res-{i}").node_id for i in range(rng.randint(1, 6))
    ]
    for resource in resources:
        if rng.random() < 0.8:
            graph.set_owner(rng.choice(users), resource)
    for team in teams:
        owner = graph.nodes[team].attributes["owner"]
        for user in users:
            if rng.random() < 0.4:
                graph.add_member(team, user, principal=owner)
    for resource in resources:
        owner = graph.owner_of(resource)
        if owner is None:
            continue
        for subject in users + teams + [COMMUNITY_ID]:
            if rng.random() < 0.25:
                actions = {a for a in ACTIONS if rng.random() < 0.5} or {"read"}
                graph.grant(owner, subject, actions, resource)
    return graph, users, resources


class TestProperties:
    def test_oracle_equivalence_on_random_graphs(self):
        rng = random.Random(42)
        for _ in range(60):
            graph, users, resources = random_graph(rng)
            edges = [(e.src, e.label.value, e.dst, e.actions) for e in graph.edges.values()]
            kinds = {n: node.kind.value for n, node in graph.nodes.items()}
            for user in users:
                for resource in resources:
                    for action in ACTIONS:
                        got = graph.check_access(user, action, resource).allowed
                        want = brute_force_access(kinds, edges, user, action, resource, COMMUNITY_ID)
                        assert got == want

    def test_deny_by_default(self):
        graph = AccessGraph()
        users = [graph.create_user().node_id for _ in range(3)]
        resource = graph.create_resource("res-bare").node_id
        for user in users:
            for action in ACTIONS:
                decision = graph.check_access(user, action, resource)
                assert not decision.allowed
                assert decision.trace == []

    def test_monotonicity_adding_edges(self):
        rng = random.Random(7)
        for _ in range(30):
            graph, users, resources = random_graph(rng)
            before = {
                (u, a, r): graph.check_access(u, a, r).allowed
                for u in users
                for r in resources
                for a in ACTIONS
            }
            # add one more grant edge
            resource = rng.choice(resources)
            owner = graph.owner_of(resource)
            if owner is None:
                owner = rng.choice(users)
                graph.set_owner(owner, resource)
            graph.grant(owner, rng.choice(users), {rng.choice(ACTIONS)}, resource)
            for key, was_allowed in before.items():
                if was_allowed:
                    assert graph.check_access(*key).allowed

    def test_trace_paths_exist_in_graph(self):
        rng = random.Random(13)
        for _ in range(15):
            graph, users, resources = random_graph(rng)
            for user in users:
                for resource in resources:
                    decision = graph.check_access(user, "read", resource)
                    for path in decision.trace:
                        for edge in path:
                            assert graph.edges[edge.key] == edge


class TestAuth:
    def test_login_round_trip(self, graph):
        user = graph.create_user({"name": "alice"})
        graph.set_credentials(user.node_id, "alice", "secret")
        token = graph.authenticate("alice", "secret")
        assert graph.resolve_token(token).node_id == user.node_id

    def test_wrong_secret(self, graph):
        user = graph.create_user()
        graph.set_credentials(user.node_id, "alice", "secret")
        with pytest.raises(BadCredentials):
            graph.authenticate("alice", "wrong")

    def test_unknown_token(self, graph):
        with pytest.raises(BadCredentials):
            graph.resolve_token("nope")

    def test_token_expiry_with_injected_clock(self):
        now = [1000.0]
        graph = AccessGraph(clock=lambda: now[0], token_ttl=3600)
        user = graph.create_user()
        graph.set_credentials(user.node_id, "alice", "secret")
        token = graph.authenticate("alice", "secret")
        now[0] += 3599
        assert graph.resolve_token(token).node_id == user.node_id
        now[0] += 2
        with pytest.raises(ExpiredToken):
            graph.resolve_token(token)

    def test_duplicate_username_rejected(self, graph):
        u1 = graph.create_user()
        u2 = graph.create_user()
        graph.set_credentials(u1.node_id, "alice", "pw")
        with pytest.raises(DuplicateNode):
            graph.set_credentials(u2.node_id, "alice", "pw2")

    def test_community_node_exists(self, graph):
        assert graph.nodes[COMMUNITY_ID].kind is NodeKind.COMMUNITY
