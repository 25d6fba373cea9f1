from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from fedsim.exceptions import TimelineError

UP = 1
DOWN = 0
UNKNOWN = -1

SECONDS_PER_DAY = 86_400

STATUS_CODES = {'up': UP, 'down': DOWN}


class AvailabilityTimeline:
    """Per-instance probe states at a fixed interval.

    States are held in an int8 matrix (instances x probes) using ``UP``,
    ``DOWN`` and ``UNKNOWN``. Missing probes are explicit ``UNKNOWN`` cells.
    """

    def __init__(self, instance_ids, states, start=0, probe_interval=300):
        if probe_interval <= 0:
            raise TimelineError('probe_interval must be positive')
        matrix = np.asarray(states, dtype=np.int8)
        instance_ids = tuple(instance_ids)
        if matrix.ndim != 2:
            if matrix.size == 0 and len(instance_ids) == 0:
                matrix = matrix.reshape(0, 0)
            else:
                raise TimelineError('Timeline vectors must share one length')
        if matrix.shape[0] != len(instance_ids):
            raise TimelineError('Timeline rows do not match instance ids')
        if len(set(instance_ids)) != len(instance_ids):
            raise TimelineError('Duplicate instance id in timeline')
        if not np.isin(matrix, (UP, DOWN, UNKNOWN)).all():
            raise TimelineError('Timeline contains an invalid state')
        matrix.setflags(write=False)
        self._states = matrix
        self._rows = {instance_id: row for row, instance_id in enumerate(instance_ids)}
        self.instance_ids = instance_ids
        self.start = int(start)
        self.probe_interval = int(probe_interval)

    @classmethod
    def from_series(cls, series, start=0, probe_interval=300):
        """Build from a mapping instance id -> sequence of True/False/None."""
        ids = sorted(series)
        rows = [[UNKNOWN if value is None else (UP if value else DOWN) for value in series[i]]
                for i in ids]
        lengths = {len(row) for row in rows}
        if len(lengths) > 1:
            raise TimelineError('Timeline vectors must share one length')
        width = lengths.pop() if lengths else 0
        return cls(ids, np.array(rows, dtype=np.int8).reshape(len(ids), width), start, probe_interval)

    @property
    def states(self):
        return self._states

    @property
    def n_probes(self):
        return self._states.shape[1]

    def __contains__(self, instance_id):
        return instance_id in self._rows

    def row(self, instance_id):
        try:
            return self._rows[instance_id]
        except KeyError:
            raise TimelineError(f'Instance {instance_id} is not in the timeline') from None

    def series(self, instance_id):
        return self._states[self.row(instance_id)]

    def timestamp(self, probe_index):
        return self.start + probe_index * self.probe_interval

    def day_index(self):
        """UTC calendar-day bucket for every probe, counted from the start day."""
        offsets = self.start + np.arange(self.n_probes, dtype=np.int64) * self.probe_interval
        return offsets // SECONDS_PER_DAY - self.start // SECONDS_PER_DAY

    def day_label(self, day):
        seconds = (self.start // SECONDS_PER_DAY + int(day)) * SECONDS_PER_DAY
        return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime('%Y-%m-%d')

    def __eq__(self, other):
        if not isinstance(other, AvailabilityTimeline):
            return NotImplemented
        return (self.instance_ids == other.instance_ids and self.start == other.start
                and self.probe_interval == other.probe_interval
                and np.array_equal(self._states, other._states))

    def __repr__(self):
        return f'AvailabilityTimeline(instances={len(self.instance_ids)}, probes={self.n_probes})'


@dataclass(frozen=True)
class Outage:
    """Bounded outage: down on [start_index, end_index), up at end_index."""
    instance_id: str
    start_index: int
    end_index: int
    probe_interval: int = 300

    @property
    def duration_probes(self):
        return self.end_index - self.start_index

    @property
    def duration_days(self):
        return self.duration_probes * self.probe_interval / SECONDS_PER_DAY

    def to_dict(self):
        return {
            'instance_id': self.instance_id,
            'start_index': self.start_index,
            'end_index': self.end_index,
            'duration_probes': self.duration_probes,
            'duration_days': self.duration_days
        }


@dataclass(frozen=True)
class AsOutage:
    """Probe range in which every instance hosted in an AS is down."""
    as_id: str
    start_index: int
    end_index: int
    instance_ids: tuple
    users_affected: int = 0
    toots_affected: int = 0

    @property
    def duration_probes(self):
        return self.end_index - self.start_index

    def to_dict(self):
        return {
            'as_id': self.as_id,
            'start_index': self.start_index,
            'end_index': self.end_index,
            'duration_probes': self.duration_probes,
            'instances_affected': len(self.instance_ids),
            'users_affected': self.users_affected,
            'toots_affected': self.toots_affected
        }
