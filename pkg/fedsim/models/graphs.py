import networkx as nx


class _DirectedGraph:
    """Read-only wrapper over a networkx DiGraph."""
    kind = 'graph'

    def __init__(self, digraph=None):
        self._graph = digraph if digraph is not None else nx.DiGraph()

    @classmethod
    def from_edges(cls, nodes, edges):
        graph = nx.DiGraph()
        graph.add_nodes_from(sorted(nodes))
        graph.add_edges_from(edges)
        return cls(graph)

    @property
    def digraph(self):
        return self._graph

    @property
    def nodes(self):
        return frozenset(self._graph.nodes)

    @property
    def edges(self):
        return frozenset(self._graph.edges)

    def number_of_nodes(self):
        return self._graph.number_of_nodes()

    def number_of_edges(self):
        return self._graph.number_of_edges()

    def without(self, removed):
        """Copy of the graph with ``removed`` nodes and their incident edges dropped."""
        graph = self._graph.copy()
        graph.remove_nodes_from(removed)
        return type(self)(graph)

    def __eq__(self, other):
        if not isinstance(other, _DirectedGraph):
            return NotImplemented
        return self.kind == other.kind and self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self):
        return f'{type(self).__name__}(nodes={self.number_of_nodes()}, edges={self.number_of_edges()})'


class SocialGraph(_DirectedGraph):
    """User-level follower graph: u -> v means u follows v."""
    kind = 'social'


class FederationGraph(_DirectedGraph):
    """Instance-level graph induced from cross-instance follows.

    Each edge carries a ``weight`` attribute counting the underlying follow
    pairs. Connectivity metrics ignore it.
    """
    kind = 'federation'

    def weight(self, source, target):
        return self._graph.edges[source, target].get('weight', 1)
