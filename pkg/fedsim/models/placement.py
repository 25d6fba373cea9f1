import numpy as np

STRATEGY_NONE = 'none'
STRATEGY_SUBSCRIPTION = 'subscription'
STRATEGY_RANDOM = 'random'


def strategy_tag(strategy, n=None):
    return f'{STRATEGY_RANDOM}({n})' if strategy == STRATEGY_RANDOM else strategy


class ReplicationPlacement:
    """Toot -> set of instances holding a replica.

    Stored as a CSR incidence structure over toot and instance indices:
    replicas of toot ``k`` are ``instance_ids[indices[indptr[k]:indptr[k + 1]]]``.
    The home instance is always present.
    """

    def __init__(self, toot_ids, instance_ids, indptr, indices, homes, strategy, n=None):
        self.toot_ids = tuple(toot_ids)
        self.instance_ids = tuple(instance_ids)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.homes = np.asarray(homes, dtype=np.int64)
        self.strategy = strategy
        self.n = n
        for array in (self.indptr, self.indices, self.homes):
            array.setflags(write=False)
        self._toot_rows = {toot_id: row for row, toot_id in enumerate(self.toot_ids)}
        self._instance_cols = {instance_id: col for col, instance_id in enumerate(self.instance_ids)}

    @classmethod
    def from_sets(cls, toot_ids, instance_ids, replica_sets, homes, strategy, n=None):
        """Build from per-toot iterables of instance indices (home first)."""
        indptr = [0]
        indices = []
        for replicas in replica_sets:
            indices.extend(replicas)
            indptr.append(len(indices))
        return cls(toot_ids, instance_ids, indptr, indices, homes, strategy, n)

    @property
    def tag(self):
        return strategy_tag(self.strategy, self.n)

    @property
    def toot_index(self):
        """Toot row of every stored replica, aligned with ``indices``."""
        return np.repeat(np.arange(len(self.toot_ids)), np.diff(self.indptr))

    def __len__(self):
        return len(self.toot_ids)

    def instance_column(self, instance_id):
        return self._instance_cols[instance_id]

    def replicas(self, toot_id):
        row = self._toot_rows[toot_id]
        cols = self.indices[self.indptr[row]:self.indptr[row + 1]]
        return frozenset(self.instance_ids[col] for col in cols)

    def replica_counts(self):
        return np.diff(self.indptr)

    def as_mapping(self):
        return {toot_id: self.replicas(toot_id) for toot_id in self.toot_ids}

    def failure_mask(self, failed_instances):
        mask = np.zeros(len(self.instance_ids), dtype=bool)
        for instance_id in failed_instances:
            col = self._instance_cols.get(instance_id)
            if col is not None:
                mask[col] = True
        return mask

    def __repr__(self):
        return f'ReplicationPlacement(strategy={self.tag!r}, toots={len(self.toot_ids)})'
