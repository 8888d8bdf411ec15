"""Exception types shared across the package."""


class TrajscanError(Exception):
    """Base class for all errors raised by trajscan."""

    code = "error"


class ConfigError(TrajscanError, ValueError):
    code = "config"


class ZeroExtentError(TrajscanError, ValueError):
    code = "zero_extent"


class IngestError(TrajscanError, ValueError):
    code = "ingest"


class SizeGuardError(TrajscanError, ValueError):
    code = "size_guard"


class PlantError(TrajscanError, RuntimeError):
    code = "plant"
