"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and
subclasses) -> 2, BackendError -> 3.
"""


class TkgBenchError(Exception):
    """Base class for all package errors."""


class ConfigError(TkgBenchError):
    """Invalid configuration: bad keys, missing settings, unusable values."""


class DataError(TkgBenchError):
    """Invalid or inconsistent input data."""


class ParseError(DataError):
    """A file could not be parsed; carries path and line context."""

    def __init__(self, message, path=None, line=None):
        ctx = ""
        if path is not None:
            ctx = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(ctx + message)
        self.path = path
        self.line = line


class ValidationError(DataError):
    """A value violates a documented invariant."""


class UnknownEntityError(DataError):
    """An entity is not present in the schema; distinct from 'not allowed'."""

    def __init__(self, entity):
        super().__init__(f"entity {entity!r} has no recorded classes")
        self.entity = entity


class GenerationExhausted(TkgBenchError):
    """No relation could produce a valid fact for a day; carries diagnostics."""

    def __init__(self, timestamp, diagnostics):
        super().__init__(
            f"generation exhausted for {timestamp.isoformat()}: "
            f"no sampleable relation left"
        )
        self.timestamp = timestamp
        self.diagnostics = diagnostics


class BackendError(TkgBenchError):
    """A text-generation backend failed or is misconfigured."""
