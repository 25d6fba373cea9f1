"""Command-line surface: generate, ingest, simulate and report."""
from pathlib import Path

import click
from dotenv import dotenv_values

from fedsim import configure_logging
from fedsim.exceptions import FedsimError
from fedsim.services.experiment_service import ExperimentService, load_settings
from fedsim.services.ingest_service import DatasetBundle, IngestService

SIMULATIONS = ('resilience-users', 'resilience-instances', 'resilience-ases', 'availability-sweep')


def _run(ctx, experiment, **options):
    """Merge --config file, global flags and command options into one spec and run it."""
    spec = dict(ctx.obj['file_spec'])
    spec.update({key: value for key, value in options.items() if value is not None})
    spec['experiment'] = experiment
    if ctx.obj['seed'] is not None:
        spec['seed'] = ctx.obj['seed']
    out_dir = ctx.obj['out_dir'] or Path(ctx.obj['settings']['OUTPUT_ROOT']) / experiment
    try:
        written = ExperimentService.run_experiment(spec, out_dir)
    except FedsimError as e:
        raise click.ClickException(e.message) from e
    for path in written:
        click.echo(str(path))


@click.group()
@click.option('--seed', type=int, default=None, help='Random seed (overrides the config file).')
@click.option('--out-dir', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Directory for report files.')
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='key=value file with synthetic-generation and experiment parameters.')
@click.pass_context
def cli(ctx, seed, out_dir, config_file):
    """Federated ecosystem resilience simulator."""
    settings = load_settings()
    configure_logging(settings)
    ctx.ensure_object(dict)
    ctx.obj.update({
        'seed': seed,
        'out_dir': out_dir,
        'settings': settings,
        'file_spec': {k: v for k, v in dotenv_values(config_file).items() if v is not None} if config_file else {}
    })


@cli.command()
@click.option('--probes', type=int, default=None, help='Also generate an uptime timeline with this many probes.')
@click.pass_context
def generate(ctx, probes):
    """Generate a synthetic ecosystem bundle."""
    _run(ctx, 'generate', probes=probes)


@cli.command()
@click.argument('data_dir', type=click.Path(exists=True, file_okay=False))
@click.pass_context
def ingest(ctx, data_dir):
    """Validate a dataset bundle and write it back normalised."""
    out_dir = ctx.obj['out_dir'] or Path(ctx.obj['settings']['OUTPUT_ROOT']) / 'ingest'
    try:
        loaded = IngestService.load_bundle(DatasetBundle.from_directory(data_dir),
                                           ctx.obj['settings']['PROBE_INTERVAL'],
                                           ctx.obj['settings']['MAX_TIMELINE_PROBES'])
        written = IngestService.export_bundle(loaded.ecosystem, out_dir, loaded.timeline, loaded.logins)
    except FedsimError as e:
        raise click.ClickException(e.message) from e
    for key, value in loaded.ecosystem.summary().items():
        click.echo(f'{key}: {value}')
    for path in written:
        click.echo(str(path))


@cli.command()
@click.argument('experiment', type=click.Choice(SIMULATIONS))
@click.option('--data-dir', type=click.Path(exists=True, file_okay=False), default=None,
              help='Dataset bundle; a synthetic ecosystem is generated when omitted.')
@click.option('--fraction', type=float, default=None, help='Share of remaining users removed per step.')
@click.option('--steps', type=int, default=None, help='Number of user-removal steps.')
@click.option('--ranking', 'rankings', default=None, help='Comma-separated rankings.')
@click.option('--max-n', default=None, help="Largest number of removed units, or 'all'.")
@click.option('--target', type=click.Choice(['instances', 'ases']), default=None)
@click.option('--strategy', 'strategies', default=None,
              help='Comma-separated strategies: none, subscription, random:N.')
@click.option('--export-placement/--no-export-placement', default=None)
@click.pass_context
def simulate(ctx, experiment, **options):
    """Run a resilience or availability experiment."""
    _run(ctx, experiment, **options)


@cli.command()
@click.argument('kind', type=click.Choice(['uptime', 'stats']))
@click.option('--data-dir', type=click.Path(exists=True, file_okay=False), default=None)
@click.option('--probes', type=int, default=None, help='Synthetic timeline length when no uptime.csv is given.')
@click.option('--min-instances', type=int, default=None, help='Smallest AS considered for AS-wide outages.')
@click.pass_context
def report(ctx, kind, **options):
    """Uptime or descriptive-statistics report."""
    _run(ctx, f'{kind}-report', **options)
