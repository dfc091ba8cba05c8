"""Shared exception types."""


class UnsupportedRangeError(ValueError):
    """Input is outside the range an operation supports."""


class NoRepresentationError(ValueError):
    """A prime p = 3 (mod 4) has no representation as a sum of two squares."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured memory budget."""


class CacheFormatError(ValueError):
    """An on-disk cache file has a bad magic, version, or length."""
