"""Exception types shared across the codec."""


class CodecError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(CodecError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ConfigError(CodecError, ValueError):
    """A configuration is internally inconsistent or incompatible with an input."""


class StateError(CodecError, RuntimeError):
    """An operation was invoked in a state that does not support it."""


class NumericError(CodecError, ArithmeticError):
    """A non-finite value appeared where finite values are required."""

    def __init__(self, message: str, snapshot: dict | None = None):
        super().__init__(message)
        self.snapshot = snapshot or {}


class SymbolRangeError(CodecError, ValueError):
    """A latent symbol falls outside the entropy model's coded range."""


class CorruptionError(CodecError, ValueError):
    """A serialized artifact failed its integrity check."""


class TruncationError(CorruptionError):
    """A serialized artifact ended before all declared content was read."""


class VersioningError(CodecError, ValueError):
    """A serialized artifact does not match the model or config it is applied to."""


class DisjointRangeError(CodecError, ValueError):
    """Two rate-distortion curves share no overlapping quality interval."""
