import json
import logging
import os
from pathlib import Path

import pandas as pd
from flask import current_app, has_app_context
from marshmallow import ValidationError

from fedsim.exceptions import ExperimentError
from fedsim.models.results import RANKINGS
from fedsim.schemas.experiment import ExperimentSchema
from fedsim.services.graph_service import GraphService
from fedsim.services.ingest_service import DatasetBundle, IngestService
from fedsim.services.replication_service import ReplicationService
from fedsim.services.resilience_service import ResilienceService
from fedsim.services.stats_service import StatsService
from fedsim.services.synth_service import SynthService
from fedsim.services.uptime_service import UptimeService

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['strategy', 'target', 'ranking', 'n', 'seed', 'availability']
TRACE_COLUMNS = ['step', 'n_removed', 'target', 'ranking', 'lcc_users', 'lcc_instances',
                 'components', 'remaining_nodes', 'social_components', 'lcc_hosted_users']


def load_settings():
    if has_app_context():
        return current_app.config
    from config import config
    selected = config[os.getenv('FEDSIM_ENV', 'development')]
    return {key: getattr(selected, key) for key in dir(selected) if key.isupper()}


class ExperimentService:
    """Run one named experiment and write its CSV reports plus metadata sidecars."""

    @staticmethod
    def parse_spec(spec):
        try:
            return ExperimentSchema().load(dict(spec))
        except ValidationError as e:
            raise ExperimentError('Invalid experiment spec', e.messages) from e

    @staticmethod
    def run_experiment(spec, out_dir):
        """Validate ``spec``, run it, and return the written CSV paths.

        Outputs depend only on the spec and its seed.
        """
        settings = load_settings()
        params = ExperimentService.parse_spec(spec)
        if params['seed'] is None:
            params['seed'] = settings['DEFAULT_SEED']
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        name = params['experiment']
        logger.info('Running experiment %s (seed %d) into %s', name, params['seed'], out_dir)
        writer = _ReportWriter(out_dir, params, settings['TOOL_VERSION'])
        handler = {
            'generate': ExperimentService._generate,
            'resilience-users': ExperimentService._resilience_users,
            'resilience-instances': ExperimentService._resilience_sweep,
            'resilience-ases': ExperimentService._resilience_sweep,
            'availability-sweep': ExperimentService._availability_sweep,
            'uptime-report': ExperimentService._uptime_report,
            'stats-report': ExperimentService._stats_report
        }[name]
        handler(params, settings, writer)
        logger.info('Experiment %s wrote %d reports', name, len(writer.written))
        return writer.written

    @staticmethod
    def load_source(params, settings):
        """Ecosystem, timeline and logins for a spec: a dataset bundle or a generated ecosystem."""
        if params.get('data_dir'):
            bundle = IngestService.load_bundle(DatasetBundle.from_directory(params['data_dir']),
                                               settings['PROBE_INTERVAL'], settings['MAX_TIMELINE_PROBES'])
            return bundle.ecosystem, bundle.timeline, bundle.logins
        eco = SynthService.generate(ExperimentService.synth_config(params))
        timeline = None
        if params['probes']:
            timeline = SynthService.generate_timeline(eco, ExperimentService.timeline_config(params, settings))
        return eco, timeline, None

    @staticmethod
    def synth_config(params):
        return SynthService.load_config(_extra_keys(params), seed=params['seed'])

    @staticmethod
    def timeline_config(params, settings):
        return SynthService.load_timeline_config(
            _extra_keys(params), seed=params['seed'], n_probes=params['probes'],
            probe_interval=settings['PROBE_INTERVAL'])

    # Experiments

    @staticmethod
    def _generate(params, settings, writer):
        eco, timeline, _ = ExperimentService.load_source(params, settings)
        for path in IngestService.export_bundle(eco, writer.out_dir, timeline):
            writer.register(path)
        writer.write('calibration', [SynthService.calibration_report(eco)])

    @staticmethod
    def _resilience_users(params, settings, writer):
        eco, _, _ = ExperimentService.load_source(params, settings)
        trace = ResilienceService.remove_users_iterative(eco, params['fraction'], params['steps'])
        writer.write('resilience_users', trace.rows(), TRACE_COLUMNS)

    @staticmethod
    def _resilience_sweep(params, settings, writer):
        eco, _, _ = ExperimentService.load_source(params, settings)
        target = 'instances' if params['experiment'] == 'resilience-instances' else 'ases'
        population = len(eco.instances) if target == 'instances' else len(eco.ases)
        max_n = _resolve_max_n(params['max_n'], population)
        rows = []
        for ranking in params['rankings'] or RANKINGS[target]:
            if target == 'instances':
                trace = ResilienceService.remove_instances_top_n(eco, ranking, max_n)
            else:
                trace = ResilienceService.remove_ases_top_n(eco, ranking, max_n)
            rows.extend(trace.rows())
        writer.write(f'resilience_{target}', rows, TRACE_COLUMNS)

    @staticmethod
    def _availability_sweep(params, settings, writer):
        eco, _, _ = ExperimentService.load_source(params, settings)
        target = params['target']
        population = len(eco.instances) if target == 'instances' else len(eco.ases)
        max_n = _resolve_max_n(params['max_n'], population)
        seed = params['seed']
        rows = []
        replica_rows = []
        if not params['strategies']:
            params['strategies'] = ['none', 'subscription'] + [
                f'random:{n}' for n in settings['RANDOM_REPLICATION_SIZES']]
        for text in params['strategies']:
            strategy, n = ReplicationService.parse_strategy(text)
            placement = ReplicationService.place(eco, strategy, n, seed)
            for ranking in params['rankings'] or ['toot_count']:
                series = ReplicationService.availability_sweep(
                    eco, strategy, target, ranking, max_n, seed, n, placement=placement)
                rows.extend({'strategy': placement.tag, 'target': target, 'ranking': ranking,
                             'n': step, 'seed': seed, 'availability': value} for step, value in series)
            replica_rows.extend({'strategy': placement.tag, **row}
                                for row in ReplicationService.replica_count_distribution(placement))
            if params['export_placement']:
                writer.write(f'placement_{placement.tag.replace("(", "_").replace(")", "")}',
                             ReplicationService.export_placement(placement), ['toot_id', 'instance_ids'])
        writer.write('availability_sweep', rows, SWEEP_COLUMNS)
        writer.write('replica_counts', replica_rows, ['strategy', 'copies', 'toots', 'fraction'])

    @staticmethod
    def _uptime_report(params, settings, writer):
        eco, timeline, _ = ExperimentService.load_source(params, settings)
        if timeline is None:
            raise ExperimentError('uptime-report needs an uptime.csv in data_dir or probes > 0')
        min_instances = params['min_instances'] or settings['AS_OUTAGE_MIN_INSTANCES']

        downtime = UptimeService.downtime_table(timeline)
        writer.write('downtime', downtime, ['instance_id', 'downtime_fraction'])
        outages = [o.to_dict() for i in timeline.instance_ids for o in UptimeService.extract_outages(timeline, i)]
        writer.write('outages', outages,
                     ['instance_id', 'start_index', 'end_index', 'duration_probes', 'duration_days'])
        as_outages = UptimeService.detect_as_outages(timeline, eco, min_instances)
        writer.write('as_outages', [o.to_dict() for o in as_outages],
                     ['as_id', 'start_index', 'end_index', 'duration_probes', 'instances_affected',
                      'users_affected', 'toots_affected'])
        writer.write('as_outage_summary', UptimeService.as_outage_summary(as_outages),
                     ['as_id', 'outages', 'instances', 'users', 'toots', 'total_probes_down'])
        per_outage, summary = UptimeService.outage_impact(timeline, eco, settings['IMPACT_PERCENTILE'])
        writer.write('outage_impact', per_outage,
                     ['instance_id', 'start_index', 'end_index', 'duration_probes', 'duration_days',
                      'users_unavailable', 'toots_unavailable'])
        writer.write('outage_impact_summary', summary,
                     ['instance_id', 'outages', 'users_unavailable', 'toots_unavailable'])
        daily = UptimeService.daily_unavailability(timeline, eco)
        writer.write('daily_unavailability', daily,
                     ['day', 'instances_down', 'users_unavailable', 'toots_unavailable',
                      'toot_fraction_unavailable'])
        writer.write('downtime_by_toot_bin', UptimeService.downtime_by_toot_bin(timeline, eco, settings['TOOT_BINS']),
                     ['toot_bin', 'instance_days', 'median_daily_downtime'])
        worst = max((row['toot_fraction_unavailable'] or 0.0 for row in daily), default=None)
        writer.write('uptime_summary', [{
            'instances': len(timeline.instance_ids),
            'probes': timeline.n_probes,
            'probe_interval': timeline.probe_interval,
            'outages': len(outages),
            'as_outages': len(as_outages),
            'popularity_downtime_correlation': UptimeService.popularity_downtime_correlation(timeline, eco),
            'worst_day_toot_fraction': worst
        }])

    @staticmethod
    def _stats_report(params, settings, writer):
        eco, _, logins = ExperimentService.load_source(params, settings)
        fed = GraphService.induce_federation_graph(eco)
        social = GraphService.social_graph(eco)

        concentration = []
        for weight in ('users', 'toots'):
            report = StatsService.concentration(eco, weight, settings['CONCENTRATION_FRACTIONS'])
            concentration.extend({**row, 'gini': report.gini} for row in report.rows())
        writer.write('concentration', concentration, ['weight', 'fraction', 'top_share', 'gini'])
        writer.write('open_closed', StatsService.open_closed_split(eco),
                     ['group', 'instance_count', 'user_count', 'toot_count', 'toots_per_user'])
        hosting = StatsService.hosting_distribution(eco)
        share_columns = ['instance_count', 'user_count', 'toot_count',
                         'instance_share', 'user_share', 'toot_share']
        writer.write('hosting_as', hosting['as'], ['as_id'] + share_columns)
        writer.write('hosting_country', hosting['country'], ['country'] + share_columns)
        matrix, same_country = StatsService.country_homophily(eco, fed)
        writer.write('homophily', matrix, ['src_country', 'dst_country', 'fraction'])
        writer.write('categories', StatsService.category_breakdown(eco),
                     ['category', 'instance_count', 'user_count', 'toot_count'])
        writer.write('top_instances', GraphService.instance_summary(eco, fed),
                     ['instance_id', 'as_id', 'country', 'users', 'toots', 'out_degree', 'in_degree'])

        degree_rows = []
        for label, graph in (('social', social), ('federation', fed)):
            distribution = GraphService.out_degree_distribution(graph)
            for (degree, count), (_, ccdf) in zip(distribution, GraphService.degree_ccdf(distribution)):
                degree_rows.append({'graph': label, 'degree': degree, 'count': count, 'ccdf': ccdf})
        writer.write('degree_distribution', degree_rows, ['graph', 'degree', 'count', 'ccdf'])

        placement = ReplicationService.place_subscription(eco)
        writer.write('home_remote', ReplicationService.home_remote_ratio(eco, placement),
                     ['instance_id', 'home_toots', 'remote_toots', 'home_fraction'])
        if logins is not None:
            levels = StatsService.activity_level(logins)
            writer.write('activity', [{'instance_id': i, 'activity_level': v} for i, v in levels.items()],
                         ['instance_id', 'activity_level'])

        social_lcc = GraphService.largest_component(social)
        fed_lcc = GraphService.largest_component(fed)
        writer.write('stats_summary', [{
            **eco.summary(),
            'federation_edges': fed.number_of_edges(),
            'same_country_fraction': same_country,
            'social_lcc': social_lcc.lcc_size,
            'social_components': social_lcc.component_count,
            'federation_lcc': fed_lcc.lcc_size,
            'federation_components': fed_lcc.component_count
        }])


class _ReportWriter:
    """CSV emission with a JSON sidecar per file (spec echo, seed, tool version)."""

    def __init__(self, out_dir, params, tool_version):
        self.out_dir = out_dir
        self.params = params
        self.tool_version = tool_version
        self.written = []

    def write(self, name, rows, columns=None):
        path = self.out_dir / f'{name}.csv'
        frame = pd.DataFrame(list(rows), columns=columns)
        frame.to_csv(path, index=False, lineterminator='\n')
        self.register(path)
        return path

    def register(self, path):
        sidecar = Path(f'{path}.meta.json')
        sidecar.write_text(json.dumps({
            'file': Path(path).name,
            'experiment': self.params['experiment'],
            'seed': self.params['seed'],
            'spec': {key: _json_safe(value) for key, value in self.params.items()},
            'tool_version': self.tool_version
        }, sort_keys=True, indent=2) + '\n', encoding='utf-8')
        self.written.append(Path(path))


def _extra_keys(params):
    known = set(ExperimentSchema().fields)
    return {key: value for key, value in params.items() if key not in known}


def _resolve_max_n(value, population):
    if value == 'all':
        return population
    if value > population:
        raise ExperimentError(f'max_n {value} exceeds the population of {population}')
    return value


def _json_safe(value):
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)
