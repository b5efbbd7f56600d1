"""Exception taxonomy for the radial ground-state laboratory.

Every failure mode that callers are expected to branch on gets its own class;
anything else is a plain ValueError/RuntimeError bug.
"""


class SngsError(Exception):
    """Base class for all package-specific errors."""


# -- grid / quadrature -------------------------------------------------------

class NonPositiveRadius(SngsError):
    pass


class TooFewNodes(SngsError):
    pass


class GridMismatch(SngsError):
    pass


# -- eigen / linear algebra --------------------------------------------------

class TooManyRequested(SngsError):
    pass


class FactorizationFailure(SngsError):
    """Shift hit an eigenvalue of the pencil; retry with a perturbed shift."""


# -- model / solver ----------------------------------------------------------

class InvalidExponent(SngsError):
    """q = 3 or q outside (2, 6)."""


class NonConvergence(SngsError):
    """Newton ran out of iterations. Carries the best iterate for post-mortems."""

    def __init__(self, message, state=None, residual_norm=None, iterations=None):
        super().__init__(message)
        self.state = state
        self.residual_norm = residual_norm
        self.iterations = iterations


class TrivialCollapse(SngsError):
    """Iterates decayed to the trivial solution u == 0."""


class NegativeStateDetected(SngsError):
    """Converged to a sign-changing branch, not a ground state."""


class ContinuationStuck(SngsError):
    """Step bisection hit the minimum step without converging."""


class WrongParams(SngsError):
    pass


# -- diagnostics / scaling ---------------------------------------------------

class UnsortedInput(SngsError):
    pass


class MixedExponents(SngsError):
    pass


# -- linearized --------------------------------------------------------------

class ParityMismatch(SngsError):
    pass


class UnconvergedState(SngsError):
    pass


class WrongConvention(SngsError):
    pass


# -- cli ----------------------------------------------------------------------

class UsageError(SngsError):
    pass


class BadRange(SngsError):
    pass


class IoError(SngsError):
    """Refusing to clobber existing artifacts (or genuine I/O failure)."""
