class MicropumpError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpecError(MicropumpError, ValueError):
    """A spec field violates its physical constraint."""


class InvalidMaterialError(InvalidSpecError):
    pass


class GeometryError(MicropumpError, ValueError):
    """Magnet/plate geometry outside the model's domain (e.g. a/c <= 1)."""


class SingularPointError(MicropumpError, ValueError):
    """Field requested on (or within 1 nm of) a current filament."""


class ConvergenceError(MicropumpError, ArithmeticError):
    pass


class SolverError(MicropumpError, ArithmeticError):
    pass


class RangeTooNarrowError(MicropumpError, ValueError):
    """The coarse-grid argmax landed on the edge of the search range."""


class NoSolutionError(MicropumpError, ArithmeticError):
    pass


class ConfigError(MicropumpError, ValueError):
    """Configuration file problem; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DesignStageError(MicropumpError):
    """Failure inside the design pipeline, tagged with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class DiscretizationWarning(UserWarning):
    pass
