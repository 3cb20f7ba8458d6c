"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes or dimensions do not agree."""


class NumericError(ArithmeticError):
    """A matrix that must be positive-definite is not."""


class FrameValidityError(ValueError):
    """A rotation is not a proper rotation (orthonormal, det = +1)."""


class FormatError(ValueError):
    """Base class for container-file problems."""


class ParseError(FormatError):
    """Malformed file content. ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class VersionError(FormatError):
    """Unknown or unsupported format version."""
