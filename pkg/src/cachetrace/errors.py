"""Exception hierarchy shared by all cachetrace modules."""


class CacheTraceError(Exception):
    """Base class for all cachetrace errors."""


class GeometryError(CacheTraceError):
    """Cache level geometry is inconsistent (capacity, line size, ways)."""


class ModeConflictError(CacheTraceError):
    """GPU cache mode contradicts the configured levels."""


class RaggedTraceError(CacheTraceError):
    """Threads of one warp have unequal step counts."""


class TileTooLargeError(CacheTraceError):
    """A scratchpad tile exceeds the available shared-memory capacity."""

    def __init__(self, required: int, available: int):
        super().__init__(
            f"tile needs {required} bytes but only {available} are available"
        )
        self.required = required
        self.available = available


class BlockMismatchError(CacheTraceError):
    """Block size does not divide the problem size."""


class SizeMismatchError(CacheTraceError):
    """Problem size incompatible with the tiled layout."""


class OutOfRangeError(CacheTraceError):
    """Row/column index outside the array bounds."""


class ParseError(CacheTraceError):
    """Config document is not well formed."""


class ValidationError(CacheTraceError):
    """Config parsed but violates an invariant."""


class MetricUnavailableError(CacheTraceError):
    """Requested comparison metric does not exist for this result."""
