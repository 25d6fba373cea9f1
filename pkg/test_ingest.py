import pytest

from fedsim.exceptions import IngestError
from fedsim.models.timeline import DOWN, UNKNOWN, UP, AvailabilityTimeline
from fedsim.services.ingest_service import DatasetBundle, IngestService


def load(directory, probe_interval=300):
    return IngestService.load_bundle(DatasetBundle.from_directory(directory), probe_interval)


def append(path, text):
    with open(path, 'a', encoding='utf-8') as handle:
        handle.write(text)


class TestLoadBundle:

    def test_fixture_round_trip(self, fixture_dir, fixture_eco):
        loaded = load(fixture_dir)
        assert loaded.ecosystem == fixture_eco
        assert loaded.timeline is None
        assert loaded.logins is None

    def test_exported_rows_sorted_by_id(self, fixture_dir):
        lines = (fixture_dir / 'users.csv').read_text().splitlines()
        assert lines == ['user_id,instance_id', 'u1,i1', 'u2,i2', 'u3,i3']

    def test_empty_follows_file(self, fixture_dir):
        (fixture_dir / 'follows.csv').write_text('follower_user_id,followed_user_id\n')
        assert load(fixture_dir).ecosystem.follows == ()

    def test_ases_derived_from_instances(self, fixture_dir, fixture_eco):
        (fixture_dir / 'ases.csv').unlink()
        eco = load(fixture_dir).ecosystem
        assert eco.ases == fixture_eco.ases

    def test_ids_canonicalised(self, fixture_dir):
        append(fixture_dir / 'users.csv', ' U4 , I1 \n')
        assert load(fixture_dir).ecosystem.home_instance('u4') == 'i1'


class TestLoadErrors:

    def test_unknown_instance(self, fixture_dir):
        append(fixture_dir / 'users.csv', 'u4,i9\n')
        with pytest.raises(IngestError) as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 5
        assert excinfo.value.path == fixture_dir / 'users.csv'
        assert 'Unknown instance i9' in excinfo.value.message

    def test_duplicate_id(self, fixture_dir):
        append(fixture_dir / 'instances.csv', 'I1,a1,JP,true,\n')
        with pytest.raises(IngestError, match='Duplicate instance id i1') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 5

    def test_bad_header(self, fixture_dir):
        (fixture_dir / 'follows.csv').write_text('a,b\nu1,u2\n')
        with pytest.raises(IngestError, match='Header must be') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 1

    def test_malformed_row(self, fixture_dir):
        append(fixture_dir / 'toots.csv', 't4,u1,yesterday\n')
        with pytest.raises(IngestError) as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 5
        assert 'created_at' in excinfo.value.errors

    def test_self_follow(self, fixture_dir):
        append(fixture_dir / 'follows.csv', 'u1,u1\n')
        with pytest.raises(IngestError, match='Self-follow') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 4

    def test_missing_file(self, fixture_dir):
        (fixture_dir / 'toots.csv').unlink()
        with pytest.raises(IngestError, match='does not exist'):
            load(fixture_dir)

    def test_empty_file(self, fixture_dir):
        (fixture_dir / 'users.csv').write_text('')
        with pytest.raises(IngestError, match='header row is required'):
            load(fixture_dir)

    def test_error_payload(self, fixture_dir):
        append(fixture_dir / 'users.csv', 'u4,i9\n')
        with pytest.raises(IngestError) as excinfo:
            load(fixture_dir)
        payload = excinfo.value.to_dict()
        assert payload['success'] is False
        assert payload['line'] == 5


class TestTimelineAndLogins:

    def test_uptime_grid(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text(
            'timestamp,instance_id,status\n1000,i1,up\n1600,i1,down\n1300,i2,up\n')
        timeline = load(fixture_dir).timeline
        assert timeline.instance_ids == ('i1', 'i2', 'i3')
        assert timeline.start == 1000
        assert timeline.states.tolist() == [[UP, UNKNOWN, DOWN], [UNKNOWN, UP, UNKNOWN], [UNKNOWN] * 3]

    def test_off_grid_probe(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i1,up\n450,i1,up\n')
        with pytest.raises(IngestError, match='probe grid') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 3

    def test_duplicate_probe(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i1,up\n0,i1,down\n')
        with pytest.raises(IngestError, match='Duplicate probe') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 3

    def test_uptime_unknown_instance(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i7,up\n')
        with pytest.raises(IngestError, match='Unknown instance'):
            load(fixture_dir)

    def test_custom_probe_interval(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i1,up\n60,i1,down\n')
        assert load(fixture_dir, probe_interval=60).timeline.n_probes == 2

    def test_status_case_insensitive(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i1,UP\n300,i1, Down\n')
        assert load(fixture_dir).timeline.states[0].tolist() == [UP, DOWN]

    def test_outlier_timestamp_rejected(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text(
            'timestamp,instance_id,status\n0,i1,up\n3000000000000,i1,up\n300,i2,up\n')
        with pytest.raises(IngestError, match='the limit is') as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 3

    def test_probe_limit_configurable(self, fixture_dir):
        (fixture_dir / 'uptime.csv').write_text('timestamp,instance_id,status\n0,i1,up\n1200,i1,down\n')
        bundle = DatasetBundle.from_directory(fixture_dir)
        assert IngestService.load_bundle(bundle, 300, max_probes=5).timeline.n_probes == 5
        with pytest.raises(IngestError, match='5 probes'):
            IngestService.load_bundle(bundle, 300, max_probes=4)

    def test_timeline_export_reloads(self, fixture_eco, tmp_path):
        timeline = AvailabilityTimeline(('i1', 'i2', 'i3'),
                                        [[UP, DOWN, UP], [UNKNOWN, UP, UP], [DOWN, DOWN, UP]], start=600)
        IngestService.export_bundle(fixture_eco, tmp_path / 'bundle', timeline=timeline)
        assert load(tmp_path / 'bundle').timeline.states.tolist() == timeline.states.tolist()

    def test_logins_ordered_by_week(self, fixture_dir):
        (fixture_dir / 'logins.csv').write_text(
            'instance_id,week_index,active_fraction\ni2,1,0.5\ni2,0,0.25\ni1,0,0.1\n')
        assert load(fixture_dir).logins == {'i1': [0.1], 'i2': [0.25, 0.5]}

    def test_login_fraction_range(self, fixture_dir):
        (fixture_dir / 'logins.csv').write_text('instance_id,week_index,active_fraction\ni1,0,1.5\n')
        with pytest.raises(IngestError) as excinfo:
            load(fixture_dir)
        assert excinfo.value.line == 2
