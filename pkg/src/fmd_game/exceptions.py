"""Exceptions raised by the fmd_game package."""

from typing import Optional


class FMDGameError(Exception):
    """Base class for every error raised by fmd_game."""
    pass


class GraphParseError(FMDGameError):
    """A temporal edge-list line could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InvalidMoveError(FMDGameError):
    """A strategy change refers to an invalid ladder index or is a no-op."""
    pass


class OracleTooLargeError(FMDGameError):
    """The enumeration oracle was asked for more profiles than it allows."""
    pass


class UndefinedRatioError(FMDGameError):
    """PoA/PoS requested with a zero social-optimum cost."""
    pass


class DatasetError(FMDGameError):
    """A dataset could not be downloaded, found in the cache, or read."""
    pass


class ChecksumMismatchError(DatasetError):
    """A cached or downloaded dataset does not match its recorded digest."""
    pass


class ConfigError(FMDGameError):
    """An experiment configuration failed validation."""
    pass


class MissingRunError(FMDGameError):
    """A plot series needs runs that the result bundle does not contain."""

    def __init__(self, init_label: str, objective: str):
        self.init_label = init_label
        self.objective = objective
        super().__init__(
            f"result bundle has no run for (init={init_label!r}, objective={objective!r})"
        )


class NonConvergenceError(FMDGameError):
    """A run hit its iteration guard while strict mode was requested."""
    pass
