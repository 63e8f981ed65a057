"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where a formula is defined."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to meet its tolerance."""


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


class IngestError(ValueError):
    """A data file could not be read into a sample series."""
