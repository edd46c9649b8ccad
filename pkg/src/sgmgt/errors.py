"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when a numeric input lies outside a function's domain."""


class SamplerError(RuntimeError):
    """Raised when an auxiliary-variable sampler cannot produce a draw."""


class DivergenceError(RuntimeError):
    """Raised when a chain state acquires a non-finite coordinate."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite state at iteration {iteration}")


class DataError(ValueError):
    """Malformed dataset input (bad row, non-binary label, ...)."""


class ConfigError(ValueError):
    """Experiment file could not be parsed or failed validation."""


class TraceFormatError(ValueError):
    """A persisted trace file does not match the documented layout."""
