import logging
from collections import Counter

import networkx as nx

from fedsim.exceptions import EcosystemError, ExperimentError
from fedsim.models.graphs import FederationGraph, SocialGraph
from fedsim.models.results import ComponentSummary, RANKINGS

logger = logging.getLogger(__name__)


class GraphService:
    """Graph construction and connectivity metrics."""

    @staticmethod
    def social_graph(eco):
        """User-level follower graph G(V, E)."""
        return SocialGraph.from_edges(eco.users, eco.follows)

    @staticmethod
    def induce_federation_graph(eco):
        """Instance-level graph: I_a -> I_b iff some user on I_a follows a user on I_b."""
        weights = Counter()
        for follower, followed in eco.follows:
            try:
                source = eco.users[follower].instance_id
                target = eco.users[followed].instance_id
            except KeyError as e:
                raise EcosystemError(f'Follow edge references unknown user {e.args[0]}') from None
            if source not in eco.instances or target not in eco.instances:
                raise EcosystemError(f'Follow edge {follower} -> {followed} references an unknown instance')
            if source != target:
                weights[(source, target)] += 1

        graph = nx.DiGraph()
        graph.add_nodes_from(eco.instances)
        graph.add_weighted_edges_from(
            (source, target, weight) for (source, target), weight in sorted(weights.items()))
        logger.debug('Induced federation graph with %d nodes and %d edges',
                     graph.number_of_nodes(), graph.number_of_edges())
        return FederationGraph(graph)

    @staticmethod
    def out_degree_distribution(graph):
        """Sorted (degree, count) pairs over every node."""
        counts = Counter(degree for _, degree in graph.digraph.out_degree())
        return sorted(counts.items())

    @staticmethod
    def in_degree_distribution(graph):
        counts = Counter(degree for _, degree in graph.digraph.in_degree())
        return sorted(counts.items())

    @staticmethod
    def degree_ccdf(distribution):
        """(degree, fraction of nodes with degree >= it) from a degree distribution."""
        total = sum(count for _, count in distribution)
        rows = []
        remaining = total
        for degree, count in distribution:
            rows.append((degree, remaining / total))
            remaining -= count
        return rows

    @staticmethod
    def largest_component(graph):
        """Weakly connected LCC size, component count and LCC membership."""
        digraph = graph.digraph if hasattr(graph, 'digraph') else graph
        if digraph.number_of_nodes() == 0:
            return ComponentSummary(0, 0, frozenset())
        components = list(nx.weakly_connected_components(digraph))
        largest = min(components, key=lambda c: (-len(c), min(c)))
        return ComponentSummary(len(largest), len(components), frozenset(largest))

    @staticmethod
    def rank_instances(eco, ranking, fed=None):
        """Instance ids ordered by ranking (descending), ties by ascending id."""
        if ranking == 'user_count':
            values = eco.user_counts
        elif ranking == 'toot_count':
            values = eco.toot_counts
        elif ranking == 'connection_count':
            fed = fed or GraphService.induce_federation_graph(eco)
            values = dict(fed.digraph.degree())
        else:
            raise ExperimentError(
                f"Ranking '{ranking}' is not valid for instances; choose one of {RANKINGS['instances']}")
        return sorted(eco.instances, key=lambda instance_id: (-values[instance_id], instance_id))

    @staticmethod
    def rank_ases(eco, ranking):
        """AS ids ordered by ranking (descending), ties by ascending id."""
        if ranking == 'instance_count':
            values = {as_id: len(ids) for as_id, ids in eco.instances_by_as.items()}
        elif ranking in ('user_count', 'toot_count'):
            per_instance = eco.user_counts if ranking == 'user_count' else eco.toot_counts
            values = {as_id: sum(per_instance[i] for i in ids)
                      for as_id, ids in eco.instances_by_as.items()}
        else:
            raise ExperimentError(
                f"Ranking '{ranking}' is not valid for ASes; choose one of {RANKINGS['ases']}")
        return sorted(eco.ases, key=lambda as_id: (-values[as_id], as_id))

    @staticmethod
    def instance_summary(eco, fed=None):
        """Per-instance users, toots and federation degrees, most toots first."""
        fed = fed or GraphService.induce_federation_graph(eco)
        digraph = fed.digraph
        rows = [{
            'instance_id': instance_id,
            'as_id': instance.as_id,
            'country': instance.country,
            'users': eco.user_counts[instance_id],
            'toots': eco.toot_counts[instance_id],
            'out_degree': digraph.out_degree(instance_id),
            'in_degree': digraph.in_degree(instance_id)
        } for instance_id, instance in eco.instances.items()]
        rows.sort(key=lambda row: (-row['toots'], row['instance_id']))
        return rows
