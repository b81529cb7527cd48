"""Shared exception types."""


class CorpuskitError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(CorpuskitError, ValueError):
    """A configuration value is missing, empty, or names an unknown field."""


class TruncatedArchiveError(CorpuskitError, IOError):
    """An archive stream ended mid-record; complete records were already yielded."""


class VersionConflictError(CorpuskitError):
    """An optimistic-concurrency write carried a stale or non-incrementing version."""


class AlreadyDecidedError(CorpuskitError):
    """A verdict was posted for a domain that already has one."""
