"""Exception hierarchy shared by all stages."""


class PPFError(Exception):
    """Base class for every error raised by ppfbank."""


class ConfigError(PPFError, ValueError):
    """Invalid configuration or mismatched shapes between stages."""


class DomainError(PPFError, ValueError):
    """Argument outside the domain of a numerical function."""


class DegenerateFilterError(PPFError, ArithmeticError):
    """Prototype coefficients sum to zero and cannot be normalized."""


class InsufficientHistoryError(PPFError, ValueError):
    """Fewer input spectra than filter taps."""


class UnsupportedSizeError(PPFError, ValueError):
    """Transform length not supported by the fast path."""


class DecodeError(PPFError):
    """Malformed sample or coefficient data.

    ``offset`` is the byte position in the source where decoding failed.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
