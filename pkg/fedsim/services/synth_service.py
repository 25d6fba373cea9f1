import logging

import numpy as np
from dotenv import dotenv_values
from marshmallow import EXCLUDE, ValidationError

from fedsim.exceptions import ConfigError
from fedsim.models.ecosystem import AutonomousSystem, Ecosystem, Instance, Toot, User
from fedsim.models.timeline import DOWN, UNKNOWN, UP, AvailabilityTimeline
from fedsim.schemas.synth import COUNTRY_CODES, SynthConfigSchema, TimelineConfigSchema
from fedsim.services.stats_service import StatsService

logger = logging.getLogger(__name__)

CATEGORIES = ('tech', 'gaming', 'art', 'music', 'adult', 'journalism',
              'activism', 'lgbt', 'academia', 'generic')

MAX_DRAW_ATTEMPTS = 100

COUNTRY_EXPONENT = 1.0


class SynthService:
    """Seeded synthetic ecosystems and availability timelines."""

    @staticmethod
    def load_config(source=None, **overrides):
        """Build a SynthConfig from a key=value file, a mapping, or defaults plus overrides."""
        if source is None:
            data = {}
        elif isinstance(source, dict):
            data = dict(source)
        else:
            data = dict(dotenv_values(source))
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return SynthConfigSchema(unknown=EXCLUDE).load(data)
        except ValidationError as e:
            raise ConfigError('Invalid synthetic configuration', e.messages) from e

    @staticmethod
    def load_timeline_config(source=None, **overrides):
        data = dict(source or {})
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return TimelineConfigSchema(unknown=EXCLUDE).load(data)
        except ValidationError as e:
            raise ConfigError('Invalid timeline configuration', e.messages) from e

    @staticmethod
    def generate(config):
        """Generate an ecosystem with Zipf-skewed hosting and power-law follows.

        Deterministic given ``config.seed``. Every AS hosts at least one
        instance and every instance at least one user.
        """
        SynthService._check_feasible(config)
        rng = np.random.default_rng(config.seed)

        country_weights = np.arange(1, config.n_countries + 1, dtype=float) ** -COUNTRY_EXPONENT
        as_country = rng.choice(config.n_countries, size=config.n_ases,
                                p=country_weights / country_weights.sum())
        instances_per_as = _zipf_partition(rng, config.n_instances, config.n_ases, config.as_size_exponent)
        users_per_instance = _zipf_partition(rng, config.n_users, config.n_instances,
                                             config.instance_size_exponent)
        open_flags = rng.random(config.n_instances) < config.p_open_registration
        categories = rng.integers(0, len(CATEGORIES), size=config.n_instances)
        instance_as = np.repeat(np.arange(config.n_ases), instances_per_as)
        user_instance = np.repeat(np.arange(config.n_instances), users_per_instance)

        popularity = rng.pareto(config.target_popularity_exponent - 1, size=config.n_users) + 1
        out_degree = _power_law_sample(rng, config.n_users, config.follow_out_degree_exponent,
                                       config.n_users - 1, config.mean_out_degree)
        source, target = _draw_follows(rng, config, user_instance, users_per_instance, popularity, out_degree)

        toot_counts = _power_law_sample(rng, config.n_users, config.toots_per_user_exponent,
                                        max(1, int(100 * config.mean_toots_per_user)),
                                        config.mean_toots_per_user)
        toot_authors = np.repeat(np.arange(config.n_users), toot_counts)
        created_at = rng.integers(config.toot_window_start, config.toot_window_end + 1,
                                  size=len(toot_authors))

        as_ids = _ids('as', config.n_ases)
        instance_ids = [f'{name}.example' for name in _ids('inst', config.n_instances)]
        user_ids = [f'{name}@{instance_ids[i]}' for name, i in zip(_ids('user', config.n_users), user_instance)]
        toot_ids = _ids('toot', len(toot_authors))

        eco = Ecosystem.build(
            ases=[AutonomousSystem(as_ids[a], COUNTRY_CODES[as_country[a]]) for a in range(config.n_ases)],
            instances=[Instance(instance_ids[i], as_ids[instance_as[i]], COUNTRY_CODES[as_country[instance_as[i]]],
                                bool(open_flags[i]), CATEGORIES[categories[i]])
                       for i in range(config.n_instances)],
            users=[User(user_ids[u], instance_ids[user_instance[u]]) for u in range(config.n_users)],
            follows=[(user_ids[s], user_ids[t]) for s, t in zip(source.tolist(), target.tolist())],
            toots=[Toot(toot_ids[k], user_ids[a], int(ts))
                   for k, (a, ts) in enumerate(zip(toot_authors.tolist(), created_at.tolist()))],
            name=f'synthetic-seed{config.seed}'
        )
        logger.info('Generated ecosystem %s: %s', eco.name, eco.summary())
        return eco

    @staticmethod
    def calibration_report(eco):
        """Skew measures used to tune configs toward observed concentration."""
        local = sum(1 for follower, followed in eco.follows
                    if eco.users[follower].instance_id == eco.users[followed].instance_id)
        report = eco.summary()
        if eco.instances:
            users = StatsService.concentration(eco, 'users', (0.05, 0.10))
            report.update({
                'top5_user_share': users.top_share[0.05],
                'top10_user_share': users.top_share[0.10],
                'gini_instance_sizes': users.gini
            })
        else:
            report.update({'top5_user_share': None, 'top10_user_share': None, 'gini_instance_sizes': None})
        report['mean_out_degree'] = len(eco.follows) / len(eco.users) if eco.users else None
        report['local_follow_fraction'] = local / len(eco.follows) if eco.follows else None
        return report

    @staticmethod
    def generate_timeline(eco, config):
        """Two-state Markov up/down timeline per instance, with optional AS-wide outages.

        Per-instance long-run downtime is Beta-distributed around
        ``mean_downtime`` so most instances are reliable and a tail is not.
        """
        rng = np.random.default_rng(config.seed)
        instance_ids = tuple(eco.instances)
        count = len(instance_ids)
        states = np.empty((count, config.n_probes), dtype=np.int8)

        shape = 0.5
        downtime = rng.beta(shape, shape * (1 - config.mean_downtime) / config.mean_downtime, size=count) \
            if config.mean_downtime > 0 else np.zeros(count)
        downtime = np.clip(downtime, 0, 0.99)
        repair = 1.0 / config.mean_outage_probes
        fail = np.clip(repair * downtime / (1 - downtime), 0, 1)

        if config.n_probes:
            up = rng.random(count) >= downtime
            for probe in range(config.n_probes):
                if probe:
                    draw = rng.random(count)
                    up = np.where(up, draw >= fail, draw < repair)
                states[:, probe] = np.where(up, UP, DOWN)

        hosting = [as_id for as_id, ids in eco.instances_by_as.items() if ids]
        if config.as_outages and hosting and config.n_probes > config.as_outage_probes:
            sizes = np.array([len(eco.instances_by_as[a]) for a in hosting], dtype=float)
            column = {instance_id: row for row, instance_id in enumerate(instance_ids)}
            for _ in range(config.as_outages):
                as_id = hosting[rng.choice(len(hosting), p=sizes / sizes.sum())]
                begin = int(rng.integers(0, config.n_probes - config.as_outage_probes))
                rows = [column[i] for i in eco.instances_by_as[as_id]]
                states[rows, begin:begin + config.as_outage_probes] = DOWN
                states[rows[0], begin + config.as_outage_probes] = UP

        if config.unknown_fraction > 0:
            states[rng.random(states.shape) < config.unknown_fraction] = UNKNOWN

        logger.info('Generated timeline: %d instances x %d probes', count, config.n_probes)
        return AvailabilityTimeline(instance_ids, states, config.start, config.probe_interval)

    @staticmethod
    def _check_feasible(config):
        if not config.n_users >= config.n_instances >= config.n_ases >= 1:
            raise ConfigError('Counts must satisfy n_users >= n_instances >= n_ases >= 1')
        if config.mean_out_degree >= config.n_users:
            raise ConfigError('mean_out_degree must be below n_users')


def _ids(prefix, count):
    width = len(str(max(count, 1)))
    return [f'{prefix}{i:0{width}d}' for i in range(1, count + 1)]


def _zipf_partition(rng, total, parts, exponent):
    """Split ``total`` into ``parts`` sizes >= 1 with Zipf(exponent) skew over a random rank order."""
    ranks = rng.permutation(parts) + 1
    weights = ranks.astype(float) ** -exponent
    return rng.multinomial(total - parts, weights / weights.sum()) + 1


def _power_law_sample(rng, size, exponent, upper, mean):
    """Truncated discrete power law on 1..upper, rescaled to ``mean`` with stochastic rounding."""
    if upper < 1 or size == 0:
        return np.zeros(size, dtype=np.int64)
    support = np.arange(1, upper + 1, dtype=float)
    weights = support ** -exponent
    raw = rng.choice(support, size=size, p=weights / weights.sum())
    scaled = raw * (mean / raw.mean())
    base = np.floor(scaled)
    values = base + (rng.random(size) < scaled - base)
    return np.clip(values, 0, upper).astype(np.int64)


def _draw_follows(rng, config, user_instance, users_per_instance, popularity, out_degree):
    """Follow edges as (source, target) user-index arrays.

    Each edge targets the source's own instance with probability
    ``p_local_follow``, otherwise another instance chosen by size (or
    uniformly). Within the instance, targets are chosen by popularity.
    Self-follows and duplicates are re-drawn, up to MAX_DRAW_ATTEMPTS times,
    then skipped.
    """
    n_users = config.n_users
    source = np.repeat(np.arange(n_users), out_degree)
    edges = len(source)
    if edges == 0:
        return source, source.copy()

    local = rng.random(edges) < config.p_local_follow
    own = user_instance[source]

    inst_weight = (np.ones(config.n_instances) if config.uniform_cross_instance
                   else users_per_instance.astype(float))
    inst_cum = np.cumsum(inst_weight)
    inst_lo = inst_cum - inst_weight
    user_cum = np.cumsum(popularity)
    user_start = np.cumsum(users_per_instance) - users_per_instance
    user_end = user_start + users_per_instance
    pop_lo = np.concatenate(([0.0], user_cum))[user_start]
    pop_weight = np.concatenate(([0.0], user_cum))[user_end] - pop_lo

    def draw(idx):
        pick_instance = rng.random(len(idx))
        pick_user = rng.random(len(idx))
        src_inst = own[idx]
        r = pick_instance * (inst_cum[-1] - inst_weight[src_inst])
        r = r + (r >= inst_lo[src_inst]) * inst_weight[src_inst]
        cross = np.minimum(np.searchsorted(inst_cum, r, side='right'), config.n_instances - 1)
        inst = np.where(local[idx], src_inst, cross)
        position = pop_lo[inst] + pick_user * pop_weight[inst]
        user = np.searchsorted(user_cum, position, side='right')
        user = np.clip(user, user_start[inst], user_end[inst] - 1)
        impossible = np.where(local[idx], users_per_instance[src_inst] < 2, config.n_instances < 2)
        return np.where(impossible, -1, user)

    target = np.full(edges, -1, dtype=np.int64)
    accepted = np.zeros(edges, dtype=bool)
    dropped = np.zeros(edges, dtype=bool)
    attempts = np.zeros(edges, dtype=np.int64)
    pending = np.arange(edges)
    while pending.size:
        target[pending] = draw(pending)
        attempts[pending] += 1
        dropped[pending[target[pending] < 0]] = True

        keys = source * n_users + target
        candidates = pending[(target[pending] >= 0) & (target[pending] != source[pending])]
        candidates = candidates[~np.isin(keys[candidates], keys[accepted])]
        _, first = np.unique(keys[candidates], return_index=True)
        accepted[candidates[first]] = True

        pending = np.flatnonzero(~accepted & ~dropped)
        exhausted = attempts[pending] >= MAX_DRAW_ATTEMPTS
        dropped[pending[exhausted]] = True
        pending = pending[~exhausted]

    skipped = int(dropped.sum())
    if skipped:
        logger.debug('Skipped %d of %d follow edges after exhausting draws', skipped, edges)
    return source[accepted], target[accepted]
