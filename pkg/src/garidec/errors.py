"""Exception hierarchy shared by all garidec modules."""


class GariError(Exception):
    """Base class for every error raised by garidec."""


class InvalidInputError(GariError, ValueError):
    """Malformed or out-of-range input."""


class ModelInconsistencyError(GariError):
    """The detector error model violates the structure the transform needs."""


class DegenerateCheckError(GariError):
    """A check node with fewer than two active inputs."""


class SchedulingViolationError(GariError):
    """A decoding phase ran without the messages it depends on."""


class BackPressureOverflowError(GariError):
    """A non-stallable FIFO received a message while full."""


class InfeasibleMappingError(GariError):
    """No tile can host a check or variable under the given constraints."""


class StaleHazardError(GariError):
    """A check ordering leaves dependent checks closer than the pipeline depth."""

    def __init__(self, message, ordering=None):
        super().__init__(message)
        self.ordering = ordering
