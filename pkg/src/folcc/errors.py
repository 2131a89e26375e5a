"""Exception hierarchy shared by all folcc modules."""


class FolccError(Exception):
    """Base class for every error raised by folcc."""


class ParseError(FolccError, ValueError):
    """Expression source text does not match the grammar."""

    def __init__(self, message, offset=None, source=None):
        self.offset = offset
        self.source = source
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class DomainError(FolccError, ArithmeticError):
    """A function was evaluated outside the set where it is smooth."""


class RegularityError(FolccError, ValueError):
    """A jet or map that must be regular (nonzero first derivative) is not."""


class OrderMismatchError(FolccError, ValueError):
    """Jets of incompatible orders or base points were combined."""


class PrecisionLossError(DomainError):
    """Floating point cannot resolve the requested quantity."""


class ConfigError(FolccError, ValueError):
    """A scenario configuration is malformed."""
