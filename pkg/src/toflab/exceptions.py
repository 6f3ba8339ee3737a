"""Exception and warning types raised across the package."""


class NonConvergence(RuntimeError):
    """A series, quadrature or asymptotic branch failed to meet its tolerance."""


class DivergentIntegral(ValueError):
    """The requested integral does not exist (e.g. Re(sigma) < 0)."""


class UnsupportedFamily(TypeError):
    """Operation not defined for this wave-packet family."""


class NodeEncountered(ArithmeticError):
    """Density at or below the node threshold where a phase gradient is needed."""

    def __init__(self, message, x=None, t=None):
        super().__init__(message)
        self.x = x
        self.t = t


class SingularityNotRegularized(ValueError):
    """The Leavens kernel subtraction does not remove the |z-L|^(-3/2) singularity."""


class InsufficientTailCoverage(ValueError):
    """A distribution curve does not reach far enough into its tails."""


class NotRightMoving(ValueError):
    """Packet has non-negligible weight at p_z <= 0."""


class GridMismatch(ValueError):
    """Two curves or configurations do not share a tau grid."""


class RegimeViolation(UserWarning):
    """An asymptotic formula is being used outside its regime of validity."""
