"""Exception types shared across the toolkit."""


class EvcapError(Exception):
    """Base class for all toolkit errors."""


class SizeError(EvcapError):
    """A count or length constraint was violated."""


class BoundsError(EvcapError):
    """An event coordinate falls outside the sensor geometry."""


class ParseError(EvcapError):
    """Malformed input bytes or text."""


class ConfigError(EvcapError):
    """Invalid configuration value or combination."""


class DegenerateInputError(EvcapError):
    """Numerically degenerate input, e.g. a zero vector inside a cosine."""


class DimensionError(EvcapError):
    """Mismatched vector or matrix dimensions."""


class CaptionError(EvcapError):
    """Caption request failed: transport error, bad status, or empty text."""


class UnknownClassError(EvcapError):
    """A verdict referenced a class id absent from the manifest."""
