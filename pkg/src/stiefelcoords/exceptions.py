"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`StiefelError`; shape and value problems additionally derive from
``ValueError`` so generic callers can catch them the usual way.
"""


class StiefelError(Exception):
    """Base class for all package errors."""


class DimensionError(StiefelError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class NotOrthonormalError(StiefelError, ValueError):
    """A matrix that must have orthonormal columns does not."""


class NotSpecialOrthogonalError(StiefelError, ValueError):
    """A matrix that must lie in SO(d) is not orthogonal or has det -1."""


class AnglePiError(StiefelError, ValueError):
    """A rotation angle sits at +-pi, so the principal logarithm is undefined."""


class IndefiniteError(StiefelError, ValueError):
    """The symmetric Sylvester coefficient is not negative definite."""


class SingularError(StiefelError, ValueError):
    """A Cayley-type solve hit a (numerically) singular matrix."""


class BaseMismatchError(DimensionError):
    """Tangent vectors attached to different base points were combined."""


class ZeroTangentError(StiefelError, ValueError):
    """A random tangent direction came out numerically zero."""


class PseudoRiemannianError(StiefelError, ValueError):
    """The metric parameter gives an indefinite metric (alpha < -1)."""


class NoConvergenceError(StiefelError, RuntimeError):
    """An iterative method ran out of iterations.

    Parameters
    ----------
    message : str
    residual_history : list of float
        Residual norms recorded until the iteration stopped.
    """

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)
