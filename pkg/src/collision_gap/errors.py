"""Exception hierarchy shared by the library and the CLI."""


class CollisionGapError(Exception):
    """Base class for all library errors."""


class ModelError(CollisionGapError):
    """Invalid or unsupported model description (CLI exit code 2)."""


class UnsupportedVariantError(ModelError):
    pass


class EmptySpaceError(ModelError):
    pass


class InvalidPairError(ModelError, ValueError):
    pass


class ReducibleError(ModelError):
    """The generator has more than one communicating class."""

    def __init__(self, message, n_classes=None):
        super().__init__(message)
        self.n_classes = n_classes


class DomainError(CollisionGapError, ValueError):
    pass


class ShapeError(CollisionGapError, ValueError):
    pass


class SpecParseError(ModelError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EstimationError(CollisionGapError):
    """Monte Carlo estimation failed (CLI exit code 3)."""


class FitWindowError(EstimationError):
    pass


class ConvergenceError(CollisionGapError):
    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations
