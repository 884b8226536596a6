"""Exception types shared across the package."""


class StreamQuantError(Exception):
    """Base class for all package-specific errors."""


class InvalidQuantile(StreamQuantError, ValueError):
    """Target quantile outside the open interval (0, 1)."""


class InvalidCapacity(StreamQuantError, ValueError):
    """Buffer capacity below the supported minimum of 3."""


class NonFiniteValue(StreamQuantError, ValueError):
    """NaN or infinite value rejected at an ingestion boundary."""


class NotWarmedUp(StreamQuantError, RuntimeError):
    """Estimator cannot produce an estimate yet."""


class EmptyBuffer(StreamQuantError, RuntimeError):
    """Operation requires at least one buffered value."""


class EmptySet(StreamQuantError, RuntimeError):
    """Quantile of an empty multiset requested."""


class DuplicateValue(StreamQuantError, ValueError):
    """Distinct-values precondition violated."""


class LengthMismatch(StreamQuantError, ValueError):
    """Paired series have different lengths."""


class AllTruthZero(StreamQuantError, ValueError):
    """No step is evaluable for relative error (every truth is zero)."""


class EmptySeries(StreamQuantError, ValueError):
    """Metric over an empty series requested."""


class EmptyTrace(StreamQuantError, ValueError):
    """Summary of an empty trace requested."""


class InvalidSpec(StreamQuantError, ValueError):
    """Stream or segment specification with out-of-domain parameters."""


class ConfigError(StreamQuantError, ValueError):
    """Benchmark configuration is unusable (empty grid, bad key, ...)."""


class ParseError(StreamQuantError, ValueError):
    """Malformed stream file content; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


# File-system failures are reported through the standard OS error type.
IoError = OSError
