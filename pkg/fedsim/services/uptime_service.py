import logging

import numpy as np

from fedsim.exceptions import TimelineError
from fedsim.models.timeline import DOWN, UNKNOWN, UP, AsOutage, Outage
from fedsim.services.numeric import nearest_rank_percentile

logger = logging.getLogger(__name__)


def _runs(mask):
    """(start, end) half-open index ranges of consecutive True values."""
    padded = np.concatenate(([False], np.asarray(mask, dtype=bool), [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[0::2].tolist(), edges[1::2].tolist()))


class UptimeService:
    """Downtime, outage and AS-wide failure analytics over availability timelines."""

    @staticmethod
    def downtime_fraction(tl, instance_id):
        """Down probes / known probes; None when every probe is unknown."""
        series = tl.series(instance_id)
        known = np.count_nonzero(series != UNKNOWN)
        if known == 0:
            return None
        return int(np.count_nonzero(series == DOWN)) / int(known)

    @staticmethod
    def extract_outages(tl, instance_id):
        """Maximal down-runs immediately followed by an up probe.

        A run that reaches the end of the timeline, or that is followed by an
        unknown probe, never observably returns and is not an outage.
        """
        series = tl.series(instance_id)
        outages = []
        for start, end in _runs(series == DOWN):
            if end < len(series) and series[end] == UP:
                outages.append(Outage(instance_id, start, end, tl.probe_interval))
        return outages

    @staticmethod
    def detect_as_outages(tl, eco, min_instances=8):
        """Probe ranges where every instance of an AS is down at once.

        Only ASes hosting at least ``min_instances`` instances, all present in
        the timeline, are considered. A range counts once some hosted instance
        is up again at its end.
        """
        if min_instances < 1:
            raise TimelineError('min_instances must be at least 1')
        detected = []
        for as_id, instance_ids in eco.instances_by_as.items():
            if len(instance_ids) < min_instances:
                continue
            if any(instance_id not in tl for instance_id in instance_ids):
                logger.debug('Skipping AS %s: not every hosted instance is monitored', as_id)
                continue
            block = tl.states[[tl.row(i) for i in instance_ids]]
            all_down = (block == DOWN).all(axis=0)
            any_up = (block == UP).any(axis=0)
            users = sum(eco.user_counts[i] for i in instance_ids)
            toots = sum(eco.toot_counts[i] for i in instance_ids)
            for start, end in _runs(all_down):
                if end < tl.n_probes and any_up[end]:
                    detected.append(AsOutage(as_id, start, end, tuple(instance_ids), users, toots))
        logger.info('Detected %d AS-wide outages (threshold %d instances)', len(detected), min_instances)
        return detected

    @staticmethod
    def as_outage_summary(as_outages):
        """Per AS: outage count, instances, users and toots affected."""
        summary = {}
        for outage in as_outages:
            row = summary.setdefault(outage.as_id, {
                'as_id': outage.as_id,
                'outages': 0,
                'instances': len(outage.instance_ids),
                'users': outage.users_affected,
                'toots': outage.toots_affected,
                'total_probes_down': 0
            })
            row['outages'] += 1
            row['total_probes_down'] += outage.duration_probes
        return sorted(summary.values(), key=lambda row: (-row['outages'], row['as_id']))

    @staticmethod
    def outage_impact(tl, eco, percentile=95):
        """Users/toots unavailable per outage plus a per-instance percentile summary.

        An outage hides the toots hosted on the instance that were created at or
        before the probe where it starts. Instances without bounded outages are
        left out of the summary.
        """
        created = {}
        for toot in eco.toots.values():
            created.setdefault(eco.users[toot.author_id].instance_id, []).append(toot.created_at)
        created = {i: np.sort(np.asarray(times, dtype=np.int64)) for i, times in created.items()}

        per_outage = []
        summary = []
        for instance_id in tl.instance_ids:
            if instance_id not in eco.instances:
                raise TimelineError(f'Timeline instance {instance_id} is not in the ecosystem')
            outages = UptimeService.extract_outages(tl, instance_id)
            if not outages:
                continue
            users = eco.user_counts[instance_id]
            times = created.get(instance_id, np.empty(0, dtype=np.int64))
            toots = []
            for outage in outages:
                hidden = int(np.searchsorted(times, tl.timestamp(outage.start_index), side='right'))
                toots.append(hidden)
                row = outage.to_dict()
                row.update({'users_unavailable': users, 'toots_unavailable': hidden})
                per_outage.append(row)
            summary.append({
                'instance_id': instance_id,
                'outages': len(outages),
                'users_unavailable': users,
                'toots_unavailable': nearest_rank_percentile(toots, percentile)
            })
        return per_outage, summary

    @staticmethod
    def timeline_to_failure_sets(tl, probe_index):
        """Instances down at one probe, ready for toot_availability."""
        if not 0 <= probe_index < tl.n_probes:
            raise TimelineError(f'Probe index {probe_index} is outside 0..{tl.n_probes - 1}')
        column = tl.states[:, probe_index]
        return {tl.instance_ids[row] for row in np.flatnonzero(column == DOWN)}

    @staticmethod
    def downtime_table(tl):
        """Downtime fraction per instance, ascending (CDF-ready)."""
        rows = [{'instance_id': i, 'downtime_fraction': UptimeService.downtime_fraction(tl, i)}
                for i in tl.instance_ids]
        rows.sort(key=lambda row: (row['downtime_fraction'] is None,
                                   row['downtime_fraction'] or 0.0, row['instance_id']))
        return rows

    @staticmethod
    def daily_downtime(tl, instance_id):
        """Per UTC calendar day: downtime fraction over known probes (None if all unknown)."""
        series = tl.series(instance_id)
        days = tl.day_index()
        rows = []
        for day in np.unique(days):
            chunk = series[days == day]
            known = np.count_nonzero(chunk != UNKNOWN)
            rows.append({
                'day': tl.day_label(day),
                'downtime_fraction': int(np.count_nonzero(chunk == DOWN)) / int(known) if known else None
            })
        return rows

    @staticmethod
    def downtime_by_toot_bin(tl, eco, bins=(10_000, 100_000, 1_000_000)):
        """Median per-day downtime of instances grouped by toot count."""
        edges = sorted(bins)
        labels = ([f'<{edges[0]}'] + [f'{lo}-{hi}' for lo, hi in zip(edges, edges[1:])]
                  + [f'>={edges[-1]}'])
        grouped = {label: [] for label in labels}
        for instance_id in tl.instance_ids:
            slot = int(np.searchsorted(edges, eco.toot_counts.get(instance_id, 0), side='right'))
            for row in UptimeService.daily_downtime(tl, instance_id):
                if row['downtime_fraction'] is not None:
                    grouped[labels[slot]].append(row['downtime_fraction'])
        return [{
            'toot_bin': label,
            'instance_days': len(values),
            'median_daily_downtime': float(np.median(values)) if values else None
        } for label, values in grouped.items()]

    @staticmethod
    def popularity_downtime_correlation(tl, eco):
        """Pearson correlation of instance toot counts against downtime fractions."""
        pairs = [(eco.toot_counts.get(i, 0), UptimeService.downtime_fraction(tl, i))
                 for i in tl.instance_ids]
        pairs = [(toots, down) for toots, down in pairs if down is not None]
        if len(pairs) < 2:
            return None
        data = np.array(pairs, dtype=float)
        if data[:, 0].std() == 0 or data[:, 1].std() == 0:
            return None
        return float(np.corrcoef(data[:, 0], data[:, 1])[0, 1])

    @staticmethod
    def daily_unavailability(tl, eco):
        """Per UTC day: instances down the whole day and the users/toots they host.

        An instance counts for a day when it has known probes that day and every
        one of them is down.
        """
        days = tl.day_index()
        total_toots = len(eco.toots)
        rows = []
        for day in np.unique(days):
            chunk = tl.states[:, days == day]
            known = (chunk != UNKNOWN).sum(axis=1)
            whole_day = (known > 0) & ((chunk == DOWN).sum(axis=1) == known)
            instance_ids = [tl.instance_ids[row] for row in np.flatnonzero(whole_day)]
            toots = sum(eco.toot_counts.get(i, 0) for i in instance_ids)
            rows.append({
                'day': tl.day_label(day),
                'instances_down': len(instance_ids),
                'users_unavailable': sum(eco.user_counts.get(i, 0) for i in instance_ids),
                'toots_unavailable': toots,
                'toot_fraction_unavailable': toots / total_toots if total_toots else None
            })
        return rows
