import numpy as np
import pytest

from conftest import build_ecosystem
from fedsim.exceptions import ConfigError
from fedsim.models.synth import SynthConfig
from fedsim.models.timeline import UNKNOWN
from fedsim.services.graph_service import GraphService
from fedsim.services.ingest_service import IngestService
from fedsim.services.synth_service import SynthService
from fedsim.services.uptime_service import UptimeService


def top_share(eco, fraction):
    sizes = sorted(eco.user_counts.values(), reverse=True)
    k = int(np.ceil(round(fraction * len(sizes), 9)))
    return sum(sizes[:k]) / sum(sizes)


class TestGenerate:

    def test_full_locality_gives_no_federation_edges(self):
        config = SynthService.load_config(seed=1, n_users=4, n_instances=2, n_ases=1,
                                          mean_out_degree=1, p_local_follow=1.0)
        eco = SynthService.generate(config)
        assert all(eco.users[a].instance_id == eco.users[b].instance_id for a, b in eco.follows)
        assert GraphService.induce_federation_graph(eco).number_of_edges() == 0

    def test_no_locality_gives_only_cross_instance_follows(self):
        eco = SynthService.generate(SynthConfig(seed=4, n_users=300, n_instances=10, n_ases=3,
                                                mean_out_degree=4, p_local_follow=0.0))
        assert eco.follows
        assert all(eco.users[a].instance_id != eco.users[b].instance_id for a, b in eco.follows)

    def test_top_decile_holds_skewed_share(self):
        eco = SynthService.generate(SynthConfig(seed=7, n_users=1000, n_instances=50,
                                                instance_size_exponent=1.5))
        assert top_share(eco, 0.10) > 0.40

    def test_deterministic(self, tmp_path):
        config = SynthConfig(seed=11, n_users=200, n_instances=12, n_ases=4, mean_out_degree=5)
        first, second = SynthService.generate(config), SynthService.generate(config)
        assert first == second
        IngestService.export_bundle(first, tmp_path / 'a')
        IngestService.export_bundle(second, tmp_path / 'b')
        for name in ('ases.csv', 'instances.csv', 'users.csv', 'follows.csv', 'toots.csv'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_different_seeds_differ(self):
        base = dict(n_users=200, n_instances=12, n_ases=4, mean_out_degree=5)
        assert SynthService.generate(SynthConfig(seed=1, **base)) != SynthService.generate(SynthConfig(seed=2, **base))

    @pytest.mark.parametrize('seed', range(5))
    def test_hosting_invariants(self, seed):
        config = SynthConfig(seed=seed, n_users=300, n_instances=30, n_ases=8, mean_out_degree=6)
        eco = SynthService.generate(config)
        assert len(eco.users) == 300
        assert len(eco.instances) == 30
        assert len(eco.ases) == 8
        assert min(eco.user_counts.values()) >= 1
        assert min(len(ids) for ids in eco.instances_by_as.values()) >= 1
        assert all(a != b for a, b in eco.follows)
        assert len(set(eco.follows)) == len(eco.follows)
        out_degrees = GraphService.out_degree_distribution(GraphService.social_graph(eco))
        assert max(degree for degree, _ in out_degrees) <= config.n_users - 1
        assert all(config.toot_window_start <= t.created_at <= config.toot_window_end
                   for t in eco.toots.values())

    def test_realised_mean_out_degree_near_target(self):
        eco = SynthService.generate(SynthConfig(seed=3, n_users=2000, n_instances=40, n_ases=5,
                                                mean_out_degree=8))
        assert len(eco.follows) / len(eco.users) == pytest.approx(8, rel=0.25)

    def test_uniform_cross_instance_flag(self):
        eco = SynthService.generate(SynthConfig(seed=2, n_users=200, n_instances=20, n_ases=4,
                                                mean_out_degree=4, uniform_cross_instance=True))
        assert len(eco.follows) > 0

    def test_monotone_skew_in_instance_exponent(self):
        def mean_share(exponent):
            shares = [top_share(SynthService.generate(SynthConfig(
                seed=seed, n_users=500, n_instances=40, n_ases=5, mean_out_degree=2,
                instance_size_exponent=exponent)), 0.05) for seed in range(20)]
            return np.mean(shares)

        assert mean_share(0.5) <= mean_share(1.0) <= mean_share(2.0)


class TestConfig:

    def test_defaults(self):
        assert SynthService.load_config() == SynthConfig()

    def test_key_value_file(self, tmp_path):
        path = tmp_path / 'synth.env'
        path.write_text('seed=9\nn_users=120\nn_instances=6\nn_ases=2\nuniform_cross_instance=true\n')
        config = SynthService.load_config(path, n_users=150)
        assert (config.seed, config.n_users, config.n_instances, config.n_ases) == (9, 150, 6, 2)
        assert config.uniform_cross_instance is True

    @pytest.mark.parametrize('overrides', [
        {'n_users': 5, 'n_instances': 10},
        {'n_instances': 4, 'n_ases': 5},
        {'n_users': 10, 'n_instances': 2, 'n_ases': 1, 'mean_out_degree': 10},
        {'p_local_follow': 1.5},
        {'follow_out_degree_exponent': 1.0},
        {'n_users': 0},
        {'n_countries': 99},
        {'toot_window_start': 10, 'toot_window_end': 5}
    ])
    def test_infeasible_configs_rejected(self, overrides):
        with pytest.raises(ConfigError):
            SynthService.load_config(**overrides)

    def test_direct_config_checked_on_generate(self):
        with pytest.raises(ConfigError):
            SynthService.generate(SynthConfig(n_users=3, n_instances=5, n_ases=1, mean_out_degree=1))


class TestCalibration:

    def test_uniform_sizes(self):
        eco = build_ecosystem([(f'i{k:02d}', 'a1') for k in range(20)],
                              [(f'u{k:02d}', f'i{k:02d}') for k in range(20)])
        report = SynthService.calibration_report(eco)
        assert report['top5_user_share'] == pytest.approx(0.05)
        assert report['top10_user_share'] == pytest.approx(0.10)
        assert report['gini_instance_sizes'] == pytest.approx(0.0)

    def test_fixture_has_no_local_follows(self, fixture_eco):
        report = SynthService.calibration_report(fixture_eco)
        assert report['local_follow_fraction'] == 0.0
        assert report['mean_out_degree'] == pytest.approx(2 / 3)

    def test_matches_independent_recount(self):
        eco = SynthService.generate(SynthConfig(seed=7, n_users=1000, n_instances=50))
        report = SynthService.calibration_report(eco)

        host = {u.id: u.instance_id for u in eco.users.values()}
        local = sum(1 for a, b in eco.follows if host[a] == host[b])
        assert report['local_follow_fraction'] == pytest.approx(local / len(eco.follows))
        assert report['mean_out_degree'] == pytest.approx(len(eco.follows) / 1000)
        assert report['top5_user_share'] == pytest.approx(top_share(eco, 0.05))
        assert report['top10_user_share'] == pytest.approx(top_share(eco, 0.10))
        assert report['users'] == 1000


class TestTimeline:

    def test_deterministic_with_expected_shape(self, fixture_eco):
        config = SynthService.load_timeline_config(seed=5, n_probes=300, unknown_fraction=0.05)
        first = SynthService.generate_timeline(fixture_eco, config)
        assert first == SynthService.generate_timeline(fixture_eco, config)
        assert first.instance_ids == ('i1', 'i2', 'i3')
        assert first.n_probes == 300
        assert (first.states == UNKNOWN).any()

    def test_zero_downtime_is_always_up(self, fixture_eco):
        config = SynthService.load_timeline_config(seed=1, n_probes=50, mean_downtime=0)
        timeline = SynthService.generate_timeline(fixture_eco, config)
        assert all(UptimeService.downtime_fraction(timeline, i) == 0.0 for i in timeline.instance_ids)

    def test_injected_as_outage_is_detected(self):
        eco = SynthService.generate(SynthConfig(seed=3, n_users=40, n_instances=4, n_ases=1, mean_out_degree=2))
        config = SynthService.load_timeline_config(seed=2, n_probes=100, mean_downtime=0,
                                                   as_outages=1, as_outage_probes=24)
        timeline = SynthService.generate_timeline(eco, config)
        outages = UptimeService.detect_as_outages(timeline, eco, min_instances=4)
        assert len(outages) == 1
        assert outages[0].duration_probes == 24
        assert outages[0].instance_ids == tuple(eco.instances)

    def test_invalid_timeline_config(self):
        with pytest.raises(ConfigError):
            SynthService.load_timeline_config(mean_downtime=1.0)
