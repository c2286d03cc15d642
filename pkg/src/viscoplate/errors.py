"""Exception taxonomy shared by all viscoplate modules."""


class ViscoplateError(Exception):
    """Base class for every error raised by this package."""


class InputError(ViscoplateError):
    """Malformed caller input (empty grid, bad shape, unsorted times)."""


class DomainError(ViscoplateError):
    """Evaluation requested outside a function's admissible domain."""


class HypothesisError(ViscoplateError):
    """A structural admissibility condition is violated (e.g. source strength above threshold)."""


class AssemblyError(ViscoplateError):
    """Gram assembly failed (typically quadrature underresolution breaking SPD)."""


class DivergedError(ViscoplateError):
    """Time integration produced non-finite values or Newton failed after retries."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ScenarioError(ViscoplateError):
    """Scenario file failed to parse or validate."""
