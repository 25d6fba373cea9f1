from marshmallow import INCLUDE, Schema, ValidationError, fields, pre_load, validate, validates_schema

from fedsim.schemas.synth import SynthConfigSchema, TimelineConfigSchema

EXPERIMENTS = (
    'generate', 'resilience-users', 'resilience-instances', 'resilience-ases',
    'availability-sweep', 'uptime-report', 'stats-report'
)


class CommaList(fields.Field):
    """A list given either as a JSON array or a comma-separated string."""

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str):
            items = [item.strip() for item in value.split(',')]
        elif isinstance(value, (list, tuple)):
            items = [str(item).strip() for item in value]
        else:
            raise ValidationError('Must be a list or a comma-separated string.')
        items = [item for item in items if item]
        if not items:
            raise ValidationError('Must name at least one value.')
        return items

    def _serialize(self, value, attr, obj, **kwargs):
        return ','.join(value) if value is not None else None


class CountOrAll(fields.Field):
    """A positive count or the word 'all'."""

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, str) and value.strip().lower() == 'all':
            return 'all'
        try:
            count = int(value)
        except (TypeError, ValueError):
            raise ValidationError("Must be a positive integer or 'all'.") from None
        if count < 1:
            raise ValidationError("Must be a positive integer or 'all'.")
        return count

    def _serialize(self, value, attr, obj, **kwargs):
        return value


class ExperimentSchema(Schema):
    """Schema for experiment specs. Generator and timeline keys are passed through; other keys are rejected."""

    class Meta:
        unknown = INCLUDE

    experiment = fields.Str(required=True, validate=validate.OneOf(EXPERIMENTS))
    seed = fields.Int(load_default=None, validate=validate.Range(min=0, max=2**64 - 1))
    data_dir = fields.Str(load_default=None)
    fraction = fields.Float(load_default=0.01, validate=validate.Range(min=0, max=1, min_inclusive=False))
    steps = fields.Int(load_default=10, validate=validate.Range(min=1))
    rankings = CommaList(load_default=None)
    max_n = CountOrAll(load_default='all')
    target = fields.Str(load_default='instances', validate=validate.OneOf(['instances', 'ases']))
    strategies = CommaList(load_default=None)
    probes = fields.Int(load_default=0, validate=validate.Range(min=0))
    export_placement = fields.Bool(load_default=False)
    min_instances = fields.Int(load_default=None, validate=validate.Range(min=1))

    @validates_schema
    def validate_source(self, data, **kwargs):
        if data['experiment'] == 'generate' and data.get('data_dir'):
            raise ValidationError('generate builds a synthetic ecosystem; data_dir is not allowed', 'data_dir')

    @pre_load
    def singular_aliases(self, data, **kwargs):
        """Accept ``strategy``/``ranking`` for single-valued runs."""
        data = dict(data)
        for alias, key in (('strategy', 'strategies'), ('ranking', 'rankings')):
            if alias in data and key not in data:
                data[key] = data.pop(alias)
        return data

    @pre_load
    def reject_unknown_keys(self, data, **kwargs):
        """Extra keys must be synthetic-generation or timeline parameters."""
        allowed = (set(self.fields) | set(SynthConfigSchema().fields) | set(TimelineConfigSchema().fields)
                   | {'strategy', 'ranking'})
        unknown = sorted(key for key in data if key not in allowed)
        if unknown:
            raise ValidationError({key: ['Unknown field.'] for key in unknown})
        return data
