"""Exception types shared across the toolkit.

Contract violations (bad shapes, out-of-range probabilities) raise plain
ValueError; the classes below mark failures the command line maps to
distinct exit codes.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration (exit code 2)."""


class DataError(Exception):
    """Missing or malformed input data (exit code 3)."""


class NumericError(Exception):
    """Non-finite values where finite ones are required (exit code 4)."""
