"""Exception hierarchy.

The CLI maps these onto exit codes: input problems -> 1, configuration
problems -> 2, broken internal invariants -> 3.
"""


class VidmineError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class InputError(VidmineError, ValueError):
    """Unreadable, malformed or inconsistent input data."""

    exit_code = 1


class ConfigError(VidmineError, ValueError):
    """A parameter is outside its allowed range."""

    exit_code = 2


class InvariantError(VidmineError, RuntimeError):
    """An internal consistency check failed."""

    exit_code = 3


class PPMFormatError(InputError):
    """Base for PPM parse failures; ``offset`` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class BadMagicError(PPMFormatError):
    pass


class MalformedHeaderError(PPMFormatError):
    pass


class UnsupportedMaxvalError(PPMFormatError):
    pass


class ZeroDimensionError(PPMFormatError):
    pass


class TruncatedDataError(PPMFormatError):
    pass


class ShapeError(InputError):
    """Vectors or histograms of incompatible dimension."""


class DegenerateInputError(InputError):
    """Zero-norm vectors or clusters whose members cancel exactly."""


class EmptyClusterError(ValueError):
    """A move would leave its source cluster empty."""
