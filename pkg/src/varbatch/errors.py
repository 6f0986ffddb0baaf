"""Exception hierarchy. The CLI maps each family to an exit code."""


class VarbatchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VarbatchError, ValueError):
    """Invalid batching or simulation configuration."""


class DataError(VarbatchError, ValueError):
    """Malformed or invalid input data."""


class ManifestError(DataError):
    pass


class InvariantError(VarbatchError, RuntimeError):
    """An internal invariant (coverage, budget law, ...) was violated."""


class PackingError(InvariantError):
    pass


class CoverageError(InvariantError):
    pass
