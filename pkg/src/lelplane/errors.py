"""Exception hierarchy. Pipeline stages raise these; the CLI maps them to exit codes."""


class LelPlaneError(Exception):
    """Base class for every error raised by the pipeline."""


class DegenerateGeometryError(LelPlaneError, ValueError):
    pass


class ConvergenceError(LelPlaneError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EnergyModelError(LelPlaneError, ValueError):
    pass


class PartitionError(LelPlaneError, ValueError):
    pass


class FilterError(LelPlaneError):
    def __init__(self, message, raw=None):
        super().__init__(message)
        self.raw = raw


class ScanFormatError(LelPlaneError, ValueError):
    """Malformed or unreadable input file."""
