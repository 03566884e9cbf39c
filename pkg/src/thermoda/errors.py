"""Exception types shared across the package."""


class ThermodaError(Exception):
    """Base class for every error this package raises on purpose."""


class DimensionError(ThermodaError):
    """Operand or window shapes are incompatible."""


class ConfigError(ThermodaError):
    """Invalid configuration or usage; the CLI maps this to exit code 2."""


class IngestError(ThermodaError):
    """A dataset file could not be ingested."""


class NumericError(ThermodaError):
    """A computation produced non-finite values."""


class MetricError(ThermodaError):
    """A metric is undefined for the given data (e.g. zero-mean truth)."""


class CheckpointError(ThermodaError):
    """A checkpoint file is corrupt, truncated, or incompatible."""
