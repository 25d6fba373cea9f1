import logging
import re
from collections import Counter

import numpy as np

from fedsim.exceptions import ExperimentError
from fedsim.models.placement import (
    STRATEGY_NONE, STRATEGY_RANDOM, STRATEGY_SUBSCRIPTION, ReplicationPlacement
)
from fedsim.models.results import RANKINGS
from fedsim.services.graph_service import GraphService

logger = logging.getLogger(__name__)

_RANDOM_PATTERN = re.compile(r'^random[:(]\s*(\d+)\s*\)?$')


class ReplicationService:
    """Toot placement strategies and availability under instance/AS failures."""

    @staticmethod
    def parse_strategy(text):
        """'none', 'subscription', 'random:N' or 'random(N)' -> (strategy, n)."""
        value = str(text).strip().lower()
        if value in (STRATEGY_NONE, STRATEGY_SUBSCRIPTION):
            return value, None
        match = _RANDOM_PATTERN.match(value)
        if match:
            return STRATEGY_RANDOM, int(match.group(1))
        raise ExperimentError(f"Unknown replication strategy '{text}'")

    @staticmethod
    def place(eco, strategy, n=None, seed=0):
        if strategy == STRATEGY_NONE:
            return ReplicationService.place_none(eco)
        if strategy == STRATEGY_SUBSCRIPTION:
            return ReplicationService.place_subscription(eco)
        if strategy == STRATEGY_RANDOM:
            return ReplicationService.place_random(eco, n, seed)
        raise ExperimentError(f"Unknown replication strategy '{strategy}'")

    @staticmethod
    def place_none(eco):
        """Every toot lives only on its home instance."""
        toot_ids, instance_ids, homes = ReplicationService._homes(eco)
        return ReplicationPlacement(toot_ids, instance_ids, np.arange(len(toot_ids) + 1), homes,
                                    homes, STRATEGY_NONE)

    @staticmethod
    def place_subscription(eco):
        """Replicate each toot to its home plus every instance hosting a follower of its author."""
        toot_ids, instance_ids, homes = ReplicationService._homes(eco)
        column = {instance_id: col for col, instance_id in enumerate(instance_ids)}

        per_author = {}
        for author, followers in eco.followers_of.items():
            home = column[eco.users[author].instance_id]
            remote = {column[eco.users[f].instance_id] for f in followers} - {home}
            per_author[author] = [home] + sorted(remote)

        replica_sets = []
        for toot_id, home in zip(toot_ids, homes):
            author = eco.toots[toot_id].author_id
            replica_sets.append(per_author.get(author, [home]))
        return ReplicationPlacement.from_sets(toot_ids, instance_ids, replica_sets, homes,
                                              STRATEGY_SUBSCRIPTION)

    @staticmethod
    def place_random(eco, n, seed=0):
        """Replicate each toot to its home plus ``n`` distinct other instances chosen uniformly.

        Draws are made one replica slot at a time for all toots, so the replicas
        for ``n`` are a prefix of those for ``n + 1`` under the same seed. ``n``
        larger than the number of other instances saturates.
        """
        if n is None or n < 0:
            raise ExperimentError('Random replication needs n >= 0')
        toot_ids, instance_ids, homes = ReplicationService._homes(eco)
        others = max(len(instance_ids) - 1, 0)
        slots = min(n, others)
        count = len(toot_ids)

        if slots == others and others > 0:
            extra = np.tile(np.arange(others), (count, 1))
        else:
            rng = np.random.default_rng(seed)
            extra = np.empty((count, slots), dtype=np.int64)
            for slot in range(slots):
                draw = (rng.random(count) * others).astype(np.int64)
                clash = (draw[:, None] == extra[:, :slot]).any(axis=1)
                while clash.any():
                    rows = np.flatnonzero(clash)
                    draw[rows] = (rng.random(len(rows)) * others).astype(np.int64)
                    clash[rows] = (draw[rows, None] == extra[rows, :slot]).any(axis=1)
                extra[:, slot] = draw

        # candidate c indexes the instances with the home removed
        extra = extra + (extra >= homes[:, None])
        matrix = np.concatenate([homes[:, None], extra], axis=1)
        width = matrix.shape[1]
        indptr = np.arange(count + 1) * width
        return ReplicationPlacement(toot_ids, instance_ids, indptr, matrix.ravel(), homes,
                                    STRATEGY_RANDOM, n)

    @staticmethod
    def toot_availability(placement, failed_instances):
        """Fraction of toots with at least one replica on a live instance."""
        unknown = set(failed_instances) - set(placement.instance_ids)
        if unknown:
            raise ExperimentError(f'Failed set references unknown instances: {sorted(unknown)}')
        total = len(placement)
        if total == 0:
            return 1.0
        failed = placement.failure_mask(failed_instances)
        live_replicas = (~failed[placement.indices]).astype(float)
        alive = np.bincount(placement.toot_index, weights=live_replicas, minlength=total)
        return int(np.count_nonzero(alive)) / total

    @staticmethod
    def availability_sweep(eco, strategy, target, ranking, max_n, seed=0, n=None, placement=None):
        """Availability after failing the top-n units, for n = 1..max_n.

        The ranking is fixed on the intact ecosystem; failure sets are nested,
        so each toot's loss step is the largest failure rank among its replicas.
        """
        if target not in ('instances', 'ases'):
            raise ExperimentError(f"Availability target must be 'instances' or 'ases', got '{target}'")
        if ranking not in RANKINGS[target]:
            raise ExperimentError(
                f"Ranking '{ranking}' is not valid for {target}; choose one of {RANKINGS[target]}")
        population = len(eco.instances) if target == 'instances' else len(eco.ases)
        if max_n < 1 or max_n > population:
            raise ExperimentError(f'max_n must be between 1 and {population}')

        if placement is None:
            placement = ReplicationService.place(eco, strategy, n, seed)
        never = max_n + 1
        fail_rank = np.full(len(placement.instance_ids), never, dtype=np.int64)
        if target == 'instances':
            order = GraphService.rank_instances(eco, ranking)
            for rank, instance_id in enumerate(order[:max_n], start=1):
                fail_rank[placement.instance_column(instance_id)] = rank
        else:
            order = GraphService.rank_ases(eco, ranking)
            for rank, as_id in enumerate(order[:max_n], start=1):
                for instance_id in eco.instances_by_as[as_id]:
                    fail_rank[placement.instance_column(instance_id)] = rank

        total = len(placement)
        if total == 0:
            return [(step, 1.0) for step in range(1, max_n + 1)]
        lost_at = np.maximum.reduceat(fail_rank[placement.indices], placement.indptr[:-1])
        lost_by = np.cumsum(np.bincount(lost_at, minlength=never + 1))
        series = [(step, int(total - lost_by[step]) / total) for step in range(1, max_n + 1)]
        logger.info('Availability sweep %s on %s by %s: %.4f after %d failures',
                    placement.tag, target, ranking, series[-1][1], max_n)
        return series

    @staticmethod
    def home_remote_ratio(eco, placement):
        """Per instance: home toots / (home + replicated-in remote toots), ascending."""
        if placement.strategy != STRATEGY_SUBSCRIPTION:
            raise ExperimentError('home_remote_ratio needs a subscription placement')
        width = len(placement.instance_ids)
        remote_mask = placement.indices != placement.homes[placement.toot_index]
        remote = np.bincount(placement.indices[remote_mask], minlength=width)
        rows = []
        for col, instance_id in enumerate(placement.instance_ids):
            home = eco.toot_counts.get(instance_id, 0)
            remote_count = int(remote[col])
            total = home + remote_count
            rows.append({
                'instance_id': instance_id,
                'home_toots': home,
                'remote_toots': remote_count,
                'home_fraction': home / total if total else None
            })
        rows.sort(key=lambda row: (row['home_fraction'] is None, row['home_fraction'] or 0.0,
                                   row['instance_id']))
        return rows

    @staticmethod
    def replica_count_distribution(placement):
        """(copies, toots, fraction) rows, copies ascending."""
        counts = Counter(int(c) for c in placement.replica_counts())
        total = len(placement)
        return [{'copies': copies, 'toots': toots, 'fraction': toots / total}
                for copies, toots in sorted(counts.items())]

    @staticmethod
    def export_placement(placement):
        """toot_id -> comma-joined instance ids."""
        return [{'toot_id': toot_id, 'instance_ids': ','.join(sorted(placement.replicas(toot_id)))}
                for toot_id in placement.toot_ids]

    @staticmethod
    def _homes(eco):
        toot_ids = tuple(eco.toots)
        instance_ids = tuple(eco.instances)
        column = {instance_id: col for col, instance_id in enumerate(instance_ids)}
        homes = np.array([column[eco.toot_home(t)] for t in toot_ids], dtype=np.int64)
        return toot_ids, instance_ids, homes


