import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from marshmallow import ValidationError

from fedsim.exceptions import EcosystemError, IngestError
from fedsim.models.ecosystem import AutonomousSystem, Ecosystem, Instance, Toot, User, canonical_id
from fedsim.models.timeline import STATUS_CODES, UNKNOWN, UP, AvailabilityTimeline
from fedsim.schemas.ingest import (
    AsRowSchema, FollowRowSchema, InstanceRowSchema, LoginRowSchema, TootRowSchema,
    UptimeRowSchema, UserRowSchema
)

logger = logging.getLogger(__name__)

MAX_TIMELINE_PROBES = 1_000_000

FILE_NAMES = {
    'ases': 'ases.csv',
    'instances': 'instances.csv',
    'users': 'users.csv',
    'follows': 'follows.csv',
    'toots': 'toots.csv',
    'uptime': 'uptime.csv',
    'logins': 'logins.csv'
}


@dataclass(frozen=True)
class DatasetBundle:
    """Paths of one dataset; ``ases``, ``uptime`` and ``logins`` are optional."""
    instances: Path
    users: Path
    follows: Path
    toots: Path
    ases: Optional[Path] = None
    uptime: Optional[Path] = None
    logins: Optional[Path] = None

    @classmethod
    def from_directory(cls, directory):
        """Bundle of the standard file names; optional files are used when present."""
        directory = Path(directory)
        optional = {key: directory / FILE_NAMES[key] for key in ('ases', 'uptime', 'logins')
                    if (directory / FILE_NAMES[key]).exists()}
        return cls(
            instances=directory / FILE_NAMES['instances'],
            users=directory / FILE_NAMES['users'],
            follows=directory / FILE_NAMES['follows'],
            toots=directory / FILE_NAMES['toots'],
            **optional
        )


@dataclass(frozen=True)
class LoadedBundle:
    """Validated dataset: ecosystem plus optional timeline and login series."""
    ecosystem: Ecosystem
    timeline: Optional[AvailabilityTimeline] = None
    logins: Optional[dict] = None


class IngestService:
    """Load, validate and export flat CSV datasets."""

    @staticmethod
    def load_bundle(bundle, probe_interval=300, max_probes=MAX_TIMELINE_PROBES):
        """Parse and cross-check every file of a bundle."""
        as_rows = IngestService._read(bundle.ases, AsRowSchema) if bundle.ases else None
        instance_rows = IngestService._read(bundle.instances, InstanceRowSchema)
        user_rows = IngestService._read(bundle.users, UserRowSchema)
        follow_rows = IngestService._read(bundle.follows, FollowRowSchema)
        toot_rows = IngestService._read(bundle.toots, TootRowSchema)

        if as_rows is None:
            as_rows = IngestService._derive_ases(instance_rows)
            as_path = bundle.instances
        else:
            as_path = bundle.ases
        as_ids = IngestService._unique(as_rows, 'as_id', as_path, 'AS')
        instance_ids = IngestService._unique(instance_rows, 'instance_id', bundle.instances, 'instance')
        user_ids = IngestService._unique(user_rows, 'user_id', bundle.users, 'user')
        IngestService._unique(toot_rows, 'toot_id', bundle.toots, 'toot')

        IngestService._resolve(instance_rows, 'as_id', as_ids, bundle.instances, 'AS')
        IngestService._resolve(user_rows, 'instance_id', instance_ids, bundle.users, 'instance')
        IngestService._resolve(toot_rows, 'author_user_id', user_ids, bundle.toots, 'user')
        IngestService._resolve(follow_rows, 'follower_user_id', user_ids, bundle.follows, 'user')
        IngestService._resolve(follow_rows, 'followed_user_id', user_ids, bundle.follows, 'user')
        follows = IngestService._follow_pairs(follow_rows, bundle.follows)

        try:
            eco = Ecosystem.build(
                ases=[AutonomousSystem(r['as_id'], r['country']) for _, r in as_rows],
                instances=[Instance(r['instance_id'], r['as_id'], r['country'], r['open_registration'],
                                    r.get('category') or None) for _, r in instance_rows],
                users=[User(r['user_id'], r['instance_id']) for _, r in user_rows],
                follows=follows,
                toots=[Toot(r['toot_id'], r['author_user_id'], r['created_at']) for _, r in toot_rows],
                name=Path(bundle.instances).parent.name or 'ecosystem'
            )
        except EcosystemError as e:
            raise IngestError(e.message, Path(bundle.instances).parent) from e
        logger.info('Loaded ecosystem %s: %s', eco.name, eco.summary())

        timeline = (IngestService.load_timeline(bundle.uptime, eco, probe_interval, max_probes)
                    if bundle.uptime else None)
        logins = IngestService.load_logins(bundle.logins, eco) if bundle.logins else None
        return LoadedBundle(eco, timeline, logins)

    @staticmethod
    def load_timeline(path, eco, probe_interval=300, max_probes=MAX_TIMELINE_PROBES):
        """Build a timeline over every ecosystem instance; absent rows are unknown.

        The span from the first to the last timestamp may cover at most
        ``max_probes`` probes.
        """
        rows = IngestService._read(path, UptimeRowSchema)
        IngestService._resolve(rows, 'instance_id', set(eco.instances), path, 'instance')
        instance_ids = tuple(eco.instances)
        if not rows:
            return AvailabilityTimeline(instance_ids, np.empty((len(instance_ids), 0), dtype=np.int8),
                                        0, probe_interval)
        start = min(r['timestamp'] for _, r in rows)
        end_line, end = max(((line, r['timestamp']) for line, r in rows), key=lambda item: item[1])
        width = (end - start) // probe_interval + 1
        if width > max_probes:
            raise IngestError(f'Timestamp {end} puts the timeline at {width} probes from {start}; '
                              f'the limit is {max_probes}', path, end_line)
        states = np.full((len(instance_ids), width), UNKNOWN, dtype=np.int8)
        column = {instance_id: row for row, instance_id in enumerate(instance_ids)}
        for line, r in rows:
            offset = r['timestamp'] - start
            if offset % probe_interval:
                raise IngestError(f"Timestamp {r['timestamp']} is off the {probe_interval}s probe grid",
                                  path, line)
            cell = (column[r['instance_id']], offset // probe_interval)
            if states[cell] != UNKNOWN:
                raise IngestError(f"Duplicate probe for {r['instance_id']} at {r['timestamp']}", path, line)
            states[cell] = STATUS_CODES[r['status']]
        logger.info('Loaded timeline with %d probes from %s', states.shape[1], path)
        return AvailabilityTimeline(instance_ids, states, start, probe_interval)

    @staticmethod
    def load_logins(path, eco=None):
        """instance id -> weekly active fractions ordered by week index."""
        rows = IngestService._read(path, LoginRowSchema)
        if eco is not None:
            IngestService._resolve(rows, 'instance_id', set(eco.instances), path, 'instance')
        weeks = {}
        for line, r in rows:
            series = weeks.setdefault(r['instance_id'], {})
            if r['week_index'] in series:
                raise IngestError(f"Duplicate week {r['week_index']} for {r['instance_id']}", path, line)
            series[r['week_index']] = r['active_fraction']
        return {instance_id: [series[w] for w in sorted(series)] for instance_id, series in sorted(weeks.items())}

    @staticmethod
    def export_bundle(eco, directory, timeline=None, logins=None):
        """Write the bundle files with rows ordered by id; returns written paths."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        tables = {
            'ases': pd.DataFrame([a.to_dict() for a in eco.ases.values()], columns=list(AsRowSchema.HEADER)),
            'instances': pd.DataFrame([{
                **i.to_dict(),
                'open_registration': 'true' if i.open_registration else 'false',
                'category': i.category or ''
            } for i in eco.instances.values()], columns=list(InstanceRowSchema.HEADER)),
            'users': pd.DataFrame([u.to_dict() for u in eco.users.values()], columns=list(UserRowSchema.HEADER)),
            'follows': pd.DataFrame(list(eco.follows), columns=list(FollowRowSchema.HEADER)),
            'toots': pd.DataFrame([t.to_dict() for t in eco.toots.values()], columns=list(TootRowSchema.HEADER))
        }
        if timeline is not None:
            tables['uptime'] = IngestService._timeline_frame(timeline)
        if logins is not None:
            tables['logins'] = pd.DataFrame(
                [{'instance_id': i, 'week_index': w, 'active_fraction': v}
                 for i, series in sorted(logins.items()) for w, v in enumerate(series)],
                columns=list(LoginRowSchema.HEADER))

        written = []
        for key, frame in tables.items():
            path = directory / FILE_NAMES[key]
            frame.to_csv(path, index=False, lineterminator='\n')
            written.append(path)
        logger.info('Exported %d files to %s', len(written), directory)
        return written

    # Internals

    @staticmethod
    def _read(path, schema_cls):
        """Validated rows as (line number, dict); the header is line 1."""
        path = Path(path)
        if not path.exists():
            raise IngestError('File does not exist', path)
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
        except pd.errors.EmptyDataError:
            raise IngestError('File is empty; a header row is required', path, 1) from None
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise IngestError(f'Malformed CSV: {e}', path) from e
        if tuple(frame.columns) != schema_cls.HEADER:
            raise IngestError(f"Header must be {','.join(schema_cls.HEADER)}", path, 1)

        schema = schema_cls()
        rows = []
        for offset, record in enumerate(frame.to_dict(orient='records')):
            line = offset + 2
            if schema_cls is InstanceRowSchema and record.get('category', '') == '':
                record['category'] = None
            try:
                row = schema.load(record)
            except ValidationError as e:
                raise IngestError('Malformed row', path, line, e.messages) from e
            try:
                for key, value in row.items():
                    if key.endswith('_id'):
                        row[key] = canonical_id(value)
            except EcosystemError as e:
                raise IngestError(e.message, path, line) from e
            if 'country' in row:
                row['country'] = row['country'].upper()
            rows.append((line, row))
        logger.debug('Read %d rows from %s', len(rows), path)
        return rows

    @staticmethod
    def _derive_ases(instance_rows):
        countries = {}
        for line, row in instance_rows:
            countries.setdefault(row['as_id'], (line, row['country']))
        return [(line, {'as_id': as_id, 'country': country})
                for as_id, (line, country) in sorted(countries.items())]

    @staticmethod
    def _unique(rows, key, path, kind):
        seen = {}
        for line, row in rows:
            value = row[key]
            if value in seen:
                raise IngestError(f'Duplicate {kind} id {value} (first on line {seen[value]})', path, line)
            seen[value] = line
        return set(seen)

    @staticmethod
    def _resolve(rows, key, known, path, kind):
        for line, row in rows:
            if row[key] not in known:
                raise IngestError(f'Unknown {kind} {row[key]}', path, line)

    @staticmethod
    def _follow_pairs(rows, path):
        seen = set()
        pairs = []
        for line, row in rows:
            pair = (row['follower_user_id'], row['followed_user_id'])
            if pair[0] == pair[1]:
                raise IngestError(f'Self-follow by {pair[0]}', path, line)
            if pair in seen:
                raise IngestError(f'Duplicate follow {pair[0]} -> {pair[1]}', path, line)
            seen.add(pair)
            pairs.append(pair)
        return pairs

    @staticmethod
    def _timeline_frame(timeline):
        probes, rows = np.nonzero(timeline.states.T != UNKNOWN)
        states = timeline.states[rows, probes]
        return pd.DataFrame({
            'timestamp': timeline.start + probes.astype(np.int64) * timeline.probe_interval,
            'instance_id': np.asarray(timeline.instance_ids, dtype=object)[rows],
            'status': np.where(states == UP, 'up', 'down')
        }, columns=list(UptimeRowSchema.HEADER))
