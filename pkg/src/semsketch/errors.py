"""Exception hierarchy shared by every semsketch module."""


class SemsketchError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SemsketchError, ValueError):
    """Raised when raster dimensions do not agree."""


class UnsupportedFormatError(SemsketchError, ValueError):
    """Raised when an image file is not an 8-bit grayscale/RGB raster."""


class CorruptPayloadError(SemsketchError, ValueError):
    """Raised when an RLE block or container payload is inconsistent."""


class BadMagicError(CorruptPayloadError):
    pass


class VersionMismatchError(CorruptPayloadError):
    pass


class TruncatedPayloadError(CorruptPayloadError):
    pass


class UndefinedIoUError(SemsketchError, ValueError):
    """Raised when a track has no foreground pixel in any frame (0/0)."""


class ProtocolError(SemsketchError, RuntimeError):
    """Raised when a codec or decoder step is called without required state."""
