from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class ComponentSummary:
    """Weak-connectivity summary of a graph."""
    lcc_size: int
    component_count: int
    lcc_membership: frozenset = field(default_factory=frozenset)

    def to_dict(self):
        return {'lcc_size': self.lcc_size, 'component_count': self.component_count}


TARGETS = ('users', 'instances', 'ases')

RANKINGS = {
    'users': ('degree',),
    'instances': ('user_count', 'toot_count', 'connection_count'),
    'ases': ('instance_count', 'user_count', 'toot_count')
}


@dataclass(frozen=True)
class RemovalPlan:
    """Which units to remove, how to rank them, and how far to go.

    ``mode`` is ``iterative_fraction`` (uses ``fraction`` and ``steps``) or
    ``top_n_sweep`` (uses ``max_n``).
    """
    target: str
    ranking: str
    mode: str
    fraction: Optional[float] = None
    steps: Optional[int] = None
    max_n: Optional[int] = None

    def to_dict(self):
        return {
            'target': self.target,
            'ranking': self.ranking,
            'mode': self.mode,
            'fraction': self.fraction,
            'steps': self.steps,
            'max_n': self.max_n
        }


@dataclass(frozen=True)
class TraceStep:
    """Metrics after one removal step; step 0 is the intact graph."""
    step: int
    removed_ids: tuple
    n_removed: int
    lcc_users: int
    lcc_instances: int
    components: int
    remaining_nodes: int
    social_components: Optional[int] = None
    lcc_hosted_users: Optional[int] = None

    def to_dict(self):
        return {
            'step': self.step,
            'n_removed': self.n_removed,
            'lcc_users': self.lcc_users,
            'lcc_instances': self.lcc_instances,
            'components': self.components,
            'remaining_nodes': self.remaining_nodes,
            'social_components': self.social_components,
            'lcc_hosted_users': self.lcc_hosted_users
        }


@dataclass(frozen=True)
class RemovalTrace:
    """Baseline metrics plus one record per removal step."""
    plan: RemovalPlan
    baseline: TraceStep
    steps: tuple

    def rows(self):
        """CSV rows: baseline first, then each step."""
        rows = []
        for record in (self.baseline,) + tuple(self.steps):
            row = record.to_dict()
            rows.append({
                'step': row['step'],
                'n_removed': row['n_removed'],
                'target': self.plan.target,
                'ranking': self.plan.ranking,
                'lcc_users': row['lcc_users'],
                'lcc_instances': row['lcc_instances'],
                'components': row['components'],
                'remaining_nodes': row['remaining_nodes'],
                'social_components': row['social_components'],
                'lcc_hosted_users': row['lcc_hosted_users']
            })
        return rows

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class ConcentrationReport:
    """Share of weight held by the top fraction of instances."""
    weight: str
    top_share: dict
    gini: Optional[float]
    total: int

    def rows(self):
        return [{'weight': self.weight, 'fraction': p, 'top_share': share}
                for p, share in self.top_share.items()]

    def to_dict(self):
        return {'weight': self.weight, 'top_share': dict(self.top_share),
                'gini': self.gini, 'total': self.total}
