"""Exception hierarchy, with the CLI exit code each class maps to."""

from __future__ import annotations


class TrajvaultError(Exception):
    """Base class for all trajvault errors."""

    exit_code = 2


class UserError(TrajvaultError):
    """Bad arguments, unsupported schemes, malformed requests."""

    exit_code = 1


class DataError(TrajvaultError):
    """The data itself is unusable: invalid, empty, infeasible."""

    exit_code = 2


class IOFailure(TrajvaultError):
    """Filesystem, network or on-disk format failures."""

    exit_code = 3


class InvalidDatasetError(DataError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid dataset: " + "; ".join(violations))


class EmptyDatasetError(DataError):
    pass


class InfeasibleTargetError(DataError):
    def __init__(self, message: str, achieved=None):
        self.achieved = achieved
        super().__init__(message)


class SchemaMismatchError(DataError):
    pass


class ImportError_(DataError):
    """JSON-lines import failure; message names the offending line."""


class VaultNotFoundError(DataError):
    pass


class VaultFormatError(IOFailure):
    """Bad magic, unsupported version, truncated or inconsistent sections."""


class ChecksumError(IOFailure):
    pass


class VaultLockedError(IOFailure):
    pass


class FetchError(IOFailure):
    pass
