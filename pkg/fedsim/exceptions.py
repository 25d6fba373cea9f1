"""Exception hierarchy shared by services, the CLI and the HTTP layer."""


class FedsimError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.message = message
        self.errors = errors

    def to_dict(self):
        """Convert error to a JSON-ready dictionary."""
        data = {'success': False, 'message': self.message}
        if self.errors:
            data['errors'] = self.errors
        return data


class EcosystemError(FedsimError):
    """An ecosystem invariant does not hold."""


class IngestError(EcosystemError):
    """A dataset file could not be loaded; carries the offending location."""

    def __init__(self, message, path=None, line=None, errors=None):
        location = ''
        if path is not None:
            location = f'{path}:{line}: ' if line is not None else f'{path}: '
        super().__init__(f'{location}{message}', errors)
        self.path = path
        self.line = line

    def to_dict(self):
        data = super().to_dict()
        data['path'] = str(self.path) if self.path is not None else None
        data['line'] = self.line
        return data


class ConfigError(FedsimError):
    """Synthetic-generation or experiment configuration is invalid."""


class ExperimentError(FedsimError):
    """Unknown experiment or parameters rejected by the target module."""


class TimelineError(FedsimError):
    """Availability timeline misuse (shape, probe index, unknown instance)."""
