"""Exception types shared across the package.

I/O failures (missing or unreadable paths) are reported with the builtin
OSError family; everything below covers payload and usage errors.
"""


class SubthermError(Exception):
    """Base class for all package-specific errors."""


class FormatError(SubthermError):
    """Malformed file payload (bad magic, truncated data, invalid header)."""


class ConfigError(SubthermError):
    """A configuration value violates its documented range."""


class DimensionError(SubthermError):
    """An image or window is too small, or a geometric bound is violated."""


class DimensionMismatch(DimensionError):
    """Two patches or maps that must share a shape do not."""


class DegenerateSystem(SubthermError):
    """A least-squares system carries no usable information."""


class OutOfRange(SubthermError):
    """An estimated quantity exceeds its configured bound."""


class RangeError(SubthermError):
    """A numeric argument is outside its mathematically valid range."""


class NonPositiveDisparity(SubthermError):
    """Triangulation was asked to invert a disparity <= 0."""


class SpecError(SubthermError):
    """An evaluation sweep specification is invalid."""
