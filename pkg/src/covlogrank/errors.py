"""Exception hierarchy.

Errors fall into two families that the CLI maps to exit codes:
``DataError`` (bad input, exit 2) and ``DegenerateError`` (the numbers
exist but a statistic is undefined, exit 3).
"""


class CovLogRankError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CovLogRankError, ValueError):
    """Invalid scheme or scenario configuration."""


class DataError(CovLogRankError, ValueError):
    """Malformed or invalid trial data."""


class EmptyData(DataError):
    pass


class EmptyArm(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing required column {column!r}")


class NonNumeric(DataError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        super().__init__(f"line {row}: column {column!r} has non-numeric value {value!r}")


class BadArmValue(DataError):
    def __init__(self, row, value):
        self.row = row
        super().__init__(f"line {row}: arm must be 0 or 1, got {value!r}")


class NegativeTime(DataError):
    def __init__(self, row, value):
        self.row = row
        super().__init__(f"line {row}: negative follow-up time {value!r}")


class InvalidMarginVector(DataError):
    pass


class DegenerateError(CovLogRankError, ArithmeticError):
    """A statistic is undefined for this dataset."""


class NoEvents(DegenerateError):
    pass


class ZeroVariance(DegenerateError):
    pass


class NonpositiveVariance(DegenerateError):
    pass


class RankDeficient(DegenerateError):
    def __init__(self, message, arm=None, stratum=None):
        self.arm = arm
        self.stratum = stratum
        super().__init__(message)


class NoRoot(DegenerateError):
    pass
