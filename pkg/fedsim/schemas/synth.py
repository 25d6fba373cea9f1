from marshmallow import Schema, fields, validate, validates_schema, ValidationError, post_load

from fedsim.models.synth import SynthConfig, TimelineConfig

COUNTRY_CODES = ('JP', 'US', 'FR', 'DE', 'GB', 'CA', 'NL', 'ES', 'IT', 'BR',
                 'KR', 'CN', 'RU', 'AU', 'CH', 'SE', 'PL', 'FI', 'AT', 'BE')

_DEFAULTS = SynthConfig()
_TIMELINE_DEFAULTS = TimelineConfig()

positive = validate.Range(min=0, min_inclusive=False)
above_one = validate.Range(min=1, min_inclusive=False, error='Must be greater than 1.')
probability = validate.Range(min=0, max=1)
count = validate.Range(min=1)


class SynthConfigSchema(Schema):
    """Schema for synthetic generation configs (key=value files or JSON)."""
    seed = fields.Int(load_default=_DEFAULTS.seed, validate=validate.Range(min=0, max=2**64 - 1))
    n_users = fields.Int(load_default=_DEFAULTS.n_users, validate=count)
    n_instances = fields.Int(load_default=_DEFAULTS.n_instances, validate=count)
    n_ases = fields.Int(load_default=_DEFAULTS.n_ases, validate=count)
    instance_size_exponent = fields.Float(load_default=_DEFAULTS.instance_size_exponent, validate=positive)
    as_size_exponent = fields.Float(load_default=_DEFAULTS.as_size_exponent, validate=positive)
    follow_out_degree_exponent = fields.Float(load_default=_DEFAULTS.follow_out_degree_exponent,
                                              validate=above_one)
    mean_out_degree = fields.Float(load_default=_DEFAULTS.mean_out_degree, validate=positive)
    p_local_follow = fields.Float(load_default=_DEFAULTS.p_local_follow, validate=probability)
    toots_per_user_exponent = fields.Float(load_default=_DEFAULTS.toots_per_user_exponent,
                                           validate=above_one)
    mean_toots_per_user = fields.Float(load_default=_DEFAULTS.mean_toots_per_user, validate=positive)
    n_countries = fields.Int(load_default=_DEFAULTS.n_countries,
                             validate=validate.Range(min=1, max=len(COUNTRY_CODES)))
    uniform_cross_instance = fields.Bool(load_default=_DEFAULTS.uniform_cross_instance)
    target_popularity_exponent = fields.Float(load_default=_DEFAULTS.target_popularity_exponent,
                                              validate=above_one)
    p_open_registration = fields.Float(load_default=_DEFAULTS.p_open_registration, validate=probability)
    toot_window_start = fields.Int(load_default=_DEFAULTS.toot_window_start, validate=validate.Range(min=0))
    toot_window_end = fields.Int(load_default=_DEFAULTS.toot_window_end, validate=validate.Range(min=0))

    @validates_schema
    def validate_feasibility(self, data, **kwargs):
        if not data['n_users'] >= data['n_instances'] >= data['n_ases']:
            raise ValidationError('Counts must satisfy n_users >= n_instances >= n_ases', 'n_instances')
        if data['mean_out_degree'] >= data['n_users']:
            raise ValidationError('mean_out_degree must be below n_users', 'mean_out_degree')
        if data['toot_window_end'] < data['toot_window_start']:
            raise ValidationError('toot_window_end precedes toot_window_start', 'toot_window_end')

    @post_load
    def make_config(self, data, **kwargs):
        return SynthConfig(**data)


class TimelineConfigSchema(Schema):
    """Schema for synthetic availability timelines."""
    seed = fields.Int(load_default=_TIMELINE_DEFAULTS.seed, validate=validate.Range(min=0, max=2**64 - 1))
    n_probes = fields.Int(load_default=_TIMELINE_DEFAULTS.n_probes, validate=validate.Range(min=0))
    probe_interval = fields.Int(load_default=_TIMELINE_DEFAULTS.probe_interval, validate=count)
    start = fields.Int(load_default=_TIMELINE_DEFAULTS.start, validate=validate.Range(min=0))
    mean_downtime = fields.Float(load_default=_TIMELINE_DEFAULTS.mean_downtime,
                                 validate=validate.Range(min=0, max=1, max_inclusive=False))
    mean_outage_probes = fields.Float(load_default=_TIMELINE_DEFAULTS.mean_outage_probes,
                                      validate=validate.Range(min=1))
    as_outages = fields.Int(load_default=_TIMELINE_DEFAULTS.as_outages, validate=validate.Range(min=0))
    as_outage_probes = fields.Int(load_default=_TIMELINE_DEFAULTS.as_outage_probes, validate=count)
    unknown_fraction = fields.Float(load_default=_TIMELINE_DEFAULTS.unknown_fraction, validate=probability)

    @post_load
    def make_config(self, data, **kwargs):
        return TimelineConfig(**data)
