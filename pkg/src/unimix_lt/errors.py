"""Shared exception types."""


class ConfigError(ValueError):
    """Bad configuration or CLI input (exit code 1)."""


class InvariantViolation(RuntimeError):
    """A runtime invariant broke mid-run, e.g. non-finite loss (exit code 2)."""
