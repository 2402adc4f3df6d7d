"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class MacroRtsError(Exception):
    pass


class ConfigError(MacroRtsError):
    """Bad configuration: unknown preset, invalid level, mismatched topology."""


class UsageError(MacroRtsError):
    """API misuse: stepping a finished game, shape mismatch, bad argument."""


class DataError(MacroRtsError):
    """Bad input data: malformed replay line, empty mining result, corrupt checkpoint."""
