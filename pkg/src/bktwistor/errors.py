"""Exception hierarchy."""


class TwistorError(Exception):
    """Base class for all package errors."""


class DimensionError(TwistorError, ValueError):
    pass


class DegenerateSubspaceError(TwistorError):
    """The form restricted to a subspace is degenerate (isotropic vectors)."""


class NotInBallError(TwistorError):
    """A V-side point does not have positive G-norm, so it is not in H^l."""


class RankError(TwistorError):
    """A basis or tensor is numerically rank deficient."""


class ChartError(TwistorError):
    """A point lies outside the requested chart U_{a,b} / U'_{a,b}."""


class QuadrupleError(TwistorError):
    """A moduli quadruple violates (xi,zeta) != 0, (mu,nu) != 0 or positivity."""


class BalancingError(TwistorError):
    """The balancing eigenproblem has no admissible or no unique solution."""


class NoIntersectionError(TwistorError):
    """Two fiber families are disjoint, so no witness exists."""


class ModelError(TwistorError):
    """An operation restricted to the l=0 or m=0 model was called otherwise."""
