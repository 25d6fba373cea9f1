from marshmallow import Schema, fields, validate, pre_load

identifier = validate.Length(min=1, max=255)


class RowSchema(Schema):
    """Base for CSV row schemas: trims every cell before validation."""
    HEADER = ()

    @pre_load
    def strip_cells(self, data, **kwargs):
        return {key: value.strip() if isinstance(value, str) else value for key, value in data.items()}


class AsRowSchema(RowSchema):
    """Schema for ases.csv rows."""
    HEADER = ('as_id', 'country')
    as_id = fields.Str(required=True, validate=identifier)
    country = fields.Str(required=True, validate=validate.Regexp(r'^[A-Za-z]{2}$',
                                                                 error='Country must be an ISO-3166 alpha-2 code'))


class InstanceRowSchema(RowSchema):
    """Schema for instances.csv rows."""
    HEADER = ('instance_id', 'as_id', 'country', 'open_registration', 'category')
    instance_id = fields.Str(required=True, validate=identifier)
    as_id = fields.Str(required=True, validate=identifier)
    country = fields.Str(required=True, validate=validate.Regexp(r'^[A-Za-z]{2}$',
                                                                 error='Country must be an ISO-3166 alpha-2 code'))
    open_registration = fields.Bool(required=True)
    category = fields.Str(load_default=None, allow_none=True)


class UserRowSchema(RowSchema):
    """Schema for users.csv rows."""
    HEADER = ('user_id', 'instance_id')
    user_id = fields.Str(required=True, validate=identifier)
    instance_id = fields.Str(required=True, validate=identifier)


class FollowRowSchema(RowSchema):
    """Schema for follows.csv rows."""
    HEADER = ('follower_user_id', 'followed_user_id')
    follower_user_id = fields.Str(required=True, validate=identifier)
    followed_user_id = fields.Str(required=True, validate=identifier)


class TootRowSchema(RowSchema):
    """Schema for toots.csv rows."""
    HEADER = ('toot_id', 'author_user_id', 'created_at')
    toot_id = fields.Str(required=True, validate=identifier)
    author_user_id = fields.Str(required=True, validate=identifier)
    created_at = fields.Int(required=True, strict=False, validate=validate.Range(min=0))


class UptimeRowSchema(RowSchema):
    """Schema for uptime.csv rows."""
    HEADER = ('timestamp', 'instance_id', 'status')
    timestamp = fields.Int(required=True, validate=validate.Range(min=0))
    instance_id = fields.Str(required=True, validate=identifier)
    status = fields.Str(required=True, validate=validate.OneOf(['up', 'down']))

    @pre_load
    def lower_status(self, data, **kwargs):
        status = data.get('status')
        if isinstance(status, str):
            data = {**data, 'status': status.strip().lower()}
        return data


class LoginRowSchema(RowSchema):
    """Schema for logins.csv rows."""
    HEADER = ('instance_id', 'week_index', 'active_fraction')
    instance_id = fields.Str(required=True, validate=identifier)
    week_index = fields.Int(required=True, validate=validate.Range(min=0))
    active_fraction = fields.Float(required=True, validate=validate.Range(min=0, max=1))
