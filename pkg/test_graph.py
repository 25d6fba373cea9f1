import random

import networkx as nx
import pytest

from conftest import build_ecosystem
from fedsim.exceptions import EcosystemError, ExperimentError
from fedsim.models import AutonomousSystem, Ecosystem, Instance, SocialGraph, Toot, User
from fedsim.services.graph_service import GraphService


def union_find_components(nodes, edges):
    parent = {node: node for node in nodes}

    def find(node):
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for node in nodes:
        groups.setdefault(find(node), set()).add(node)
    return list(groups.values())


def graph_of(nodes, edges):
    return SocialGraph.from_edges(nodes, edges)


class TestEcosystemInvariants:

    def test_ids_are_canonicalised(self):
        eco = Ecosystem.build(
            ases=[AutonomousSystem(' AS1 ', 'jp')],
            instances=[Instance('Mastodon.Social', 'as1', 'jp')],
            users=[User('Alice@Mastodon.Social', 'mastodon.social ')],
            follows=[],
            toots=[]
        )
        assert list(eco.instances) == ['mastodon.social']
        assert eco.ases['as1'].country == 'JP'
        assert eco.home_instance('alice@mastodon.social') == 'mastodon.social'

    def test_duplicate_after_canonicalisation_rejected(self):
        with pytest.raises(EcosystemError, match='Duplicate instance'):
            Ecosystem.build(
                ases=[AutonomousSystem('a1', 'JP')],
                instances=[Instance('I1', 'a1', 'JP'), Instance('i1 ', 'a1', 'JP')],
                users=[], follows=[], toots=[]
            )

    @pytest.mark.parametrize('follows, message', [
        ([('u1', 'u1')], 'Self-follow'),
        ([('u1', 'u2'), ('U1', 'u2')], 'Duplicate follow'),
        ([('u1', 'ghost')], 'unknown user')
    ])
    def test_bad_follows_rejected(self, follows, message):
        with pytest.raises(EcosystemError, match=message):
            build_ecosystem([('i1', 'a1')], [('u1', 'i1'), ('u2', 'i1')], follows)

    def test_dangling_references_rejected(self):
        with pytest.raises(EcosystemError, match='unknown AS'):
            build_ecosystem([('i1', 'a1')], [], ases=['a2'])
        with pytest.raises(EcosystemError, match='unknown instance'):
            build_ecosystem([('i1', 'a1')], [('u1', 'i9')])
        with pytest.raises(EcosystemError, match='unknown author'):
            build_ecosystem([('i1', 'a1')], [('u1', 'i1')], toots=[('t1', 'u9')])

    def test_indices(self, fixture_eco):
        assert fixture_eco.instances_by_as == {'a1': ('i1', 'i2'), 'a2': ('i3',)}
        assert fixture_eco.followers_of == {'u2': ('u1',), 'u3': ('u2',)}
        assert fixture_eco.toot_counts == {'i1': 1, 'i2': 1, 'i3': 1}
        assert fixture_eco.toot_home('t2') == 'i2'
        assert fixture_eco.summary() == {'ases': 2, 'instances': 3, 'users': 3, 'follows': 2, 'toots': 3}


class TestFederationInduction:

    def test_fixture_edges(self, fixture_eco):
        fed = GraphService.induce_federation_graph(fixture_eco)
        assert fed.edges == {('i1', 'i2'), ('i2', 'i3')}
        assert fed.nodes == {'i1', 'i2', 'i3'}

    def test_matches_brute_force_over_user_pairs(self, fixture_eco):
        expected = set()
        for u in fixture_eco.users.values():
            for v in fixture_eco.users.values():
                if (u.id, v.id) in fixture_eco.follows and u.instance_id != v.instance_id:
                    expected.add((u.instance_id, v.instance_id))
        assert GraphService.induce_federation_graph(fixture_eco).edges == expected

    def test_no_follows_keeps_isolated_instances(self):
        eco = build_ecosystem([('i1', 'a1'), ('i2', 'a1')], [('u1', 'i1')])
        fed = GraphService.induce_federation_graph(eco)
        assert fed.number_of_nodes() == 2
        assert fed.number_of_edges() == 0

    def test_intra_instance_follows_create_no_edges(self):
        eco = build_ecosystem([('i1', 'a1')], [('u1', 'i1'), ('u2', 'i1')], [('u1', 'u2')])
        assert GraphService.induce_federation_graph(eco).number_of_edges() == 0

    def test_weight_counts_follow_pairs(self):
        eco = build_ecosystem([('i1', 'a1'), ('i2', 'a1')],
                              [('u1', 'i1'), ('u2', 'i1'), ('u3', 'i2')],
                              [('u1', 'u3'), ('u2', 'u3')])
        fed = GraphService.induce_federation_graph(eco)
        assert fed.weight('i1', 'i2') == 2

    def test_order_independent(self):
        rng = random.Random(3)
        instances = [(f'i{k}', 'a1') for k in range(4)]
        users = [(f'u{k}', f'i{k % 4}') for k in range(12)]
        follows = [(f'u{a}', f'u{b}') for a in range(12) for b in range(12) if a != b and rng.random() < 0.2]
        shuffled = list(follows)
        rng.shuffle(shuffled)
        first = GraphService.induce_federation_graph(build_ecosystem(instances, users, follows))
        second = GraphService.induce_federation_graph(build_ecosystem(instances, users, shuffled))
        assert first == second


class TestDegreeDistribution:

    def test_small_graph(self):
        graph = graph_of('abc', [('a', 'b'), ('a', 'c'), ('b', 'c')])
        assert GraphService.out_degree_distribution(graph) == [(0, 1), (1, 1), (2, 1)]
        assert GraphService.in_degree_distribution(graph) == [(0, 1), (1, 1), (2, 1)]

    def test_empty_graph(self):
        assert GraphService.out_degree_distribution(graph_of([], [])) == []

    def test_star(self):
        leaves = [f'l{k}' for k in range(5)]
        graph = graph_of(['c'] + leaves, [('c', leaf) for leaf in leaves])
        assert GraphService.out_degree_distribution(graph) == [(0, 5), (5, 1)]

    def test_ccdf(self):
        ccdf = GraphService.degree_ccdf([(0, 5), (5, 1)])
        assert ccdf == [(0, 1.0), (5, pytest.approx(1 / 6))]


class TestLargestComponent:

    def test_two_pairs_and_a_singleton(self):
        summary = GraphService.largest_component(graph_of('abcde', [('a', 'b'), ('c', 'd')]))
        assert (summary.lcc_size, summary.component_count) == (2, 3)
        assert summary.lcc_membership == {'a', 'b'}

    def test_chain(self):
        nodes = [f'n{k}' for k in range(6)]
        summary = GraphService.largest_component(graph_of(nodes, list(zip(nodes, nodes[1:]))))
        assert (summary.lcc_size, summary.component_count) == (6, 1)

    def test_empty(self):
        summary = GraphService.largest_component(graph_of([], []))
        assert (summary.lcc_size, summary.component_count, summary.lcc_membership) == (0, 0, frozenset())

    def test_direction_is_ignored(self):
        summary = GraphService.largest_component(graph_of('abc', [('a', 'b'), ('c', 'b')]))
        assert summary.lcc_size == 3

    def test_accepts_raw_digraph(self):
        assert GraphService.largest_component(nx.DiGraph([('a', 'b')])).lcc_size == 2

    @pytest.mark.parametrize('seed', range(100))
    def test_matches_union_find(self, seed):
        rng = random.Random(seed)
        nodes = [f'n{k:02d}' for k in range(rng.randint(1, 15))]
        edges = [(a, b) for a in nodes for b in nodes if a != b and rng.random() < 0.08]
        summary = GraphService.largest_component(graph_of(nodes, edges))
        components = union_find_components(nodes, edges)
        assert summary.component_count == len(components)
        assert summary.lcc_size == max(len(c) for c in components)
        assert summary.lcc_size <= len(nodes)

    def test_tie_goes_to_smallest_id(self):
        summary = GraphService.largest_component(graph_of('abcd', [('c', 'd'), ('a', 'b')]))
        assert summary.lcc_membership == {'a', 'b'}

    def test_removing_a_node_never_grows_lcc(self):
        rng = random.Random(11)
        nodes = [f'n{k}' for k in range(12)]
        edges = [(a, b) for a in nodes for b in nodes if a != b and rng.random() < 0.15]
        graph = graph_of(nodes, edges)
        full = GraphService.largest_component(graph).lcc_size
        for node in nodes:
            assert GraphService.largest_component(graph.without([node])).lcc_size <= full


class TestRankings:

    def test_instances_by_user_count_ties_by_id(self):
        eco = build_ecosystem([('i1', 'a1'), ('i2', 'a1'), ('i3', 'a1')],
                              [('u1', 'i2'), ('u2', 'i2'), ('u3', 'i3'), ('u4', 'i1')])
        assert GraphService.rank_instances(eco, 'user_count') == ['i2', 'i1', 'i3']

    def test_connection_count_is_in_plus_out(self, fixture_eco):
        assert GraphService.rank_instances(fixture_eco, 'connection_count') == ['i2', 'i1', 'i3']

    def test_ases_by_instance_count(self, fixture_eco):
        assert GraphService.rank_ases(fixture_eco, 'instance_count') == ['a1', 'a2']

    def test_invalid_ranking(self, fixture_eco):
        with pytest.raises(ExperimentError):
            GraphService.rank_instances(fixture_eco, 'degree')
        with pytest.raises(ExperimentError):
            GraphService.rank_ases(fixture_eco, 'connection_count')

    def test_instance_summary(self, fixture_eco):
        rows = GraphService.instance_summary(fixture_eco)
        assert [row['instance_id'] for row in rows] == ['i1', 'i2', 'i3']
        assert rows[1] == {'instance_id': 'i2', 'as_id': 'a1', 'country': 'JP', 'users': 1, 'toots': 1,
                           'out_degree': 1, 'in_degree': 1}


def test_toot_reference_to_removed_user_is_rejected():
    with pytest.raises(EcosystemError):
        Ecosystem.build([AutonomousSystem('a', 'JP')], [Instance('i', 'a', 'JP')], [],
                        [], [Toot('t', 'nobody', 0)])
