import logging
from collections import Counter, defaultdict

from fedsim.exceptions import ExperimentError
from fedsim.models.results import ConcentrationReport
from fedsim.services.numeric import ceil_count, gini

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.05, 0.10, 0.25, 0.50, 1.0)


class StatsService:
    """Descriptive statistics over an ecosystem."""

    @staticmethod
    def concentration(eco, weight='users', fractions=DEFAULT_FRACTIONS):
        """Share of users or toots held by the top ceil(p * N) instances."""
        if weight not in ('users', 'toots'):
            raise ExperimentError(f"Concentration weight must be 'users' or 'toots', got '{weight}'")
        if not eco.instances:
            raise ExperimentError('Concentration needs at least one instance')
        values = eco.user_counts if weight == 'users' else eco.toot_counts
        ordered = sorted(eco.instances, key=lambda i: (-values[i], i))
        sizes = [values[i] for i in ordered]
        total = sum(sizes)

        shares = {}
        for p in sorted(fractions):
            top = sizes[:ceil_count(p, len(sizes))]
            shares[p] = sum(top) / total if total else None
        return ConcentrationReport(weight, shares, gini(sizes), total)

    @staticmethod
    def open_closed_split(eco):
        """Instance, user and toot totals for open and closed registrations."""
        groups = {label: {'group': label, 'instance_count': 0, 'user_count': 0, 'toot_count': 0}
                  for label in ('open', 'closed')}
        for instance_id, instance in eco.instances.items():
            group = groups['open' if instance.open_registration else 'closed']
            group['instance_count'] += 1
            group['user_count'] += eco.user_counts[instance_id]
            group['toot_count'] += eco.toot_counts[instance_id]
        for group in groups.values():
            users = group['user_count']
            group['toots_per_user'] = group['toot_count'] / users if users else 0.0
        return [groups['open'], groups['closed']]

    @staticmethod
    def activity_level(login_series):
        """Per instance: the highest weekly fraction of users logged in."""
        levels = {}
        for instance_id, series in login_series.items():
            values = list(series)
            if any(not 0 <= v <= 1 for v in values):
                raise ExperimentError(f'Login fractions for {instance_id} must lie in [0, 1]')
            levels[instance_id] = max(values) if values else None
        return dict(sorted(levels.items()))

    @staticmethod
    def hosting_distribution(eco):
        """Per-AS and per-country instance, user and toot totals with shares."""
        by_as = defaultdict(Counter)
        by_country = defaultdict(Counter)
        for instance_id, instance in eco.instances.items():
            for bucket in (by_as[instance.as_id], by_country[instance.country]):
                bucket['instance_count'] += 1
                bucket['user_count'] += eco.user_counts[instance_id]
                bucket['toot_count'] += eco.toot_counts[instance_id]
        for as_id in eco.ases:
            by_as.setdefault(as_id, Counter())
        return {
            'as': StatsService._with_shares(by_as, 'as_id'),
            'country': StatsService._with_shares(by_country, 'country')
        }

    @staticmethod
    def country_homophily(eco, fed):
        """Row-normalised country x country federation-edge fractions and the same-country share."""
        pairs = Counter()
        for source, target in fed.digraph.edges():
            pairs[(eco.instances[source].country, eco.instances[target].country)] += 1
        total = sum(pairs.values())
        if total == 0:
            return [], None
        row_totals = Counter()
        for (source, _), count in pairs.items():
            row_totals[source] += count
        matrix = [{
            'src_country': source,
            'dst_country': target,
            'fraction': count / row_totals[source]
        } for (source, target), count in sorted(pairs.items())]
        same = sum(count for (source, target), count in pairs.items() if source == target)
        return matrix, same / total

    @staticmethod
    def category_breakdown(eco):
        """Instances, users and toots per free-form category."""
        groups = defaultdict(Counter)
        for instance_id, instance in eco.instances.items():
            bucket = groups[instance.category or 'uncategorised']
            bucket['instance_count'] += 1
            bucket['user_count'] += eco.user_counts[instance_id]
            bucket['toot_count'] += eco.toot_counts[instance_id]
        rows = [{'category': name, **{k: counts[k] for k in ('instance_count', 'user_count', 'toot_count')}}
                for name, counts in groups.items()]
        rows.sort(key=lambda row: (-row['instance_count'], row['category']))
        return rows

    @staticmethod
    def _with_shares(groups, key):
        totals = Counter()
        for counts in groups.values():
            totals.update(counts)
        rows = []
        for name, counts in groups.items():
            row = {key: name}
            for column in ('instance_count', 'user_count', 'toot_count'):
                row[column] = counts[column]
                share = column.replace('_count', '_share')
                row[share] = counts[column] / totals[column] if totals[column] else None
            rows.append(row)
        rows.sort(key=lambda row: (-row['instance_count'], row[key]))
        return rows
