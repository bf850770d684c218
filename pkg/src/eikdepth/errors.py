"""Error taxonomy shared across the package.

``ConfigError`` marks bad inputs or configuration (CLI exit code 2);
``SolverError`` marks failures inside a solve (CLI exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration, file format, or argument combination."""


class SolverError(RuntimeError):
    """A solver could not run or produced an inconsistent state."""
