"""Exception types shared across the package."""


class PointMixupError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(PointMixupError, ValueError):
    """Input data is malformed (non-finite coordinates, zero-area mesh, ...)."""


class InvalidArgumentError(PointMixupError, ValueError):
    """A parameter is outside its valid range or shapes disagree."""


class CapacityError(PointMixupError):
    """Problem size exceeds what the chosen solver is allowed to handle."""


class SolverError(PointMixupError):
    """An iterative solver failed to converge.

    ``best`` carries the best complete assignment found before giving up.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ParseError(PointMixupError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TrainingError(PointMixupError):
    """Training produced a non-finite loss."""
