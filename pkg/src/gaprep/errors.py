"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class GaprepError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GaprepError):
    """Bad configuration: malformed manifest, invalid option combination."""


class DataError(GaprepError):
    """Bad input data: parse failures, schema violations, misaligned files."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
