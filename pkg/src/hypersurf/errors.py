"""Exception hierarchy shared by the geometry engine and the CLI."""


class HypersurfError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(HypersurfError, ValueError):
    """Invalid argument: index or order out of range, shape mismatch."""


class SingularityError(HypersurfError, ArithmeticError):
    """Jet division by zero or square root of a non-positive value."""


class ImmersionError(HypersurfError):
    """The chart fails to be an immersion (degenerate induced metric)."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points


class SpecError(HypersurfError, ValueError):
    """A model specification violates its invariants."""


class UnsupportedError(HypersurfError):
    """Operation not available for this model (no closed form, not compact)."""


class PreconditionError(HypersurfError):
    """A check was requested where its hypothesis does not hold."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
