from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic ecosystem generator."""
    seed: int = 0
    n_users: int = 1000
    n_instances: int = 50
    n_ases: int = 10
    instance_size_exponent: float = 1.5
    as_size_exponent: float = 1.2
    follow_out_degree_exponent: float = 2.2
    mean_out_degree: float = 10.0
    p_local_follow: float = 0.3
    toots_per_user_exponent: float = 2.0
    mean_toots_per_user: float = 10.0
    n_countries: int = 5
    uniform_cross_instance: bool = False
    target_popularity_exponent: float = 2.5
    p_open_registration: float = 0.5
    toot_window_start: int = 1491004800
    toot_window_end: int = 1525132800

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TimelineConfig:
    """Parameters of the synthetic availability timeline."""
    seed: int = 0
    n_probes: int = 2016
    probe_interval: int = 300
    start: int = 1525132800
    mean_downtime: float = 0.1
    mean_outage_probes: float = 12.0
    as_outages: int = 0
    as_outage_probes: int = 24
    unknown_fraction: float = 0.0

    def to_dict(self):
        return asdict(self)
