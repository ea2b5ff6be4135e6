"""Exception hierarchy.

Each top-level family carries the CLI exit code it maps to.
"""

from __future__ import annotations


class ParkEmsError(Exception):
    exit_code = 1


class ConfigError(ParkEmsError, ValueError):
    exit_code = 2


class DataError(ParkEmsError, ValueError):
    """Problem with an input file; names the file, column and row when known."""

    exit_code = 3

    def __init__(self, message: str, file: str | None = None,
                 column: str | None = None, row: int | None = None):
        self.file = file
        self.column = column
        self.row = row
        where = []
        if file is not None:
            where.append(f"file={file}")
        if column is not None:
            where.append(f"column={column}")
        if row is not None:
            where.append(f"row={row}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NumericError(ParkEmsError, ArithmeticError):
    exit_code = 4


class MissingFile(DataError):
    pass


class MissingColumn(DataError):
    pass


class NonContiguousTimestamps(DataError):
    pass


class InvalidValue(DataError):
    pass


class NegativeValue(InvalidValue):
    pass


class MisalignedSeries(DataError):
    pass


class EmptyDataset(DataError):
    pass


class SlotOutOfRange(DataError, IndexError):
    pass


class InsufficientHistory(DataError):
    def __init__(self, day: int, needed: int, found: int):
        self.day = day
        self.needed = needed
        self.found = found
        super().__init__(
            f"day {day} needs {needed} preceding same-type days, found {found}")


class WrongHistoryLength(ParkEmsError, ValueError):
    exit_code = 3


class ZeroThroughput(ParkEmsError, ValueError):
    exit_code = 2


class InadmissiblePower(NumericError):
    """Battery power outside its admissible range: a caller bug."""


class EpisodeFinished(ParkEmsError, RuntimeError):
    pass


class NonFiniteLoss(NumericError):
    pass


class NonFiniteGradient(NumericError):
    pass
