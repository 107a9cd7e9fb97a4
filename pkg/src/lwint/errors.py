"""Exception types raised across the package."""


class LintError(Exception):
    """Base class for all package errors."""


class InvariantViolation(LintError, ValueError):
    pass


class TruncatedHeader(LintError, ValueError):
    pass


class MalformedSlot(LintError, ValueError):
    pass


class MalformedHeader(LintError, ValueError):
    pass


class InvalidSize(LintError, ValueError):
    pass


class UnexpectedHeaderAtSource(LintError):
    """A forward packet reached its INT source already carrying a header."""


class TtlInversion(LintError, ValueError):
    pass


class InconsistentHop(LintError, ValueError):
    pass


class Unreachable(LintError):
    pass


class ConfigError(LintError):
    """Invalid scenario configuration.

    ``field`` is a dotted path into the config document (``traffic.flow_count``,
    ``flows[3].src``) so the CLI can point at the offending entry.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
