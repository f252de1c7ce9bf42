"""Exception types shared across the package."""


class SocnavError(Exception):
    """Base class for all package errors."""


class EpisodeValidationError(SocnavError, ValueError):
    pass


class EpisodeFormatError(SocnavError):
    """A stored episode directory is missing a file or is malformed."""

    def __init__(self, message, filename=None):
        self.filename = filename
        if filename is not None:
            message = f"{filename}: {message}"
        super().__init__(message)


class StorageError(SocnavError, OSError):
    pass


class InsufficientFuture(SocnavError):
    """Not enough future odometry to place the requested waypoints."""


class InputError(SocnavError, ValueError):
    """Array shape or configuration mismatch at an API boundary."""


class DegenerateGoal(SocnavError, ValueError):
    pass


class GenerationError(SocnavError):
    pass


class NonFiniteLoss(SocnavError, FloatingPointError):
    def __init__(self, message, batch_index=None):
        self.batch_index = batch_index
        super().__init__(message)


class MissingPrerequisite(SocnavError):
    """A CLI step needs an artifact that an earlier step should have produced."""
