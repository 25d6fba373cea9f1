import pytest

from fedsim import create_app
from fedsim.models import AutonomousSystem, Ecosystem, Instance, Toot, User
from fedsim.services.ingest_service import IngestService


def build_ecosystem(instances, users, follows=(), toots=None, ases=None):
    """Small ecosystems from plain tuples.

    ``instances`` is [(instance_id, as_id)], ``users`` is [(user_id, instance_id)];
    ``toots`` defaults to one toot per user.
    """
    if ases is None:
        ases = sorted({as_id for _, as_id in instances})
    if toots is None:
        toots = [(f't-{user_id}', user_id) for user_id, _ in users]
    return Ecosystem.build(
        ases=[AutonomousSystem(a, 'JP') for a in ases],
        instances=[Instance(i, a, 'JP') for i, a in instances],
        users=[User(u, i) for u, i in users],
        follows=list(follows),
        toots=[Toot(t, author, 1500000000 + k) for k, (t, author) in enumerate(toots)]
    )


@pytest.fixture
def fixture_eco():
    """Three instances, three users: u1@i1 -> u2@i2 -> u3@i3; i1,i2 on a1 and i3 on a2."""
    return Ecosystem.build(
        ases=[AutonomousSystem('a1', 'JP'), AutonomousSystem('a2', 'US')],
        instances=[
            Instance('i1', 'a1', 'JP', True, 'tech'),
            Instance('i2', 'a1', 'JP', False, 'art'),
            Instance('i3', 'a2', 'US', True, None)
        ],
        users=[User('u1', 'i1'), User('u2', 'i2'), User('u3', 'i3')],
        follows=[('u1', 'u2'), ('u2', 'u3')],
        toots=[Toot('t1', 'u1', 1500000000), Toot('t2', 'u2', 1500000100), Toot('t3', 'u3', 1500000200)],
        name='fixture'
    )


@pytest.fixture
def fixture_dir(tmp_path, fixture_eco):
    """The fixture ecosystem written as a dataset bundle."""
    directory = tmp_path / 'fixture'
    IngestService.export_bundle(fixture_eco, directory)
    return directory


@pytest.fixture
def app(tmp_path):
    app = create_app('testing')
    app.config.update(OUTPUT_ROOT=str(tmp_path / 'runs'), DATA_DIR=str(tmp_path / 'data'))
    (tmp_path / 'data').mkdir()
    return app


@pytest.fixture
def client(app):
    return app.test_client()
