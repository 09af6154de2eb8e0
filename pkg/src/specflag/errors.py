"""Exception hierarchy shared by all specflag modules."""


class SpecflagError(Exception):
    """Base class for errors raised by specflag."""


class DimensionMismatch(SpecflagError, ValueError):
    """Operands have incompatible shapes."""


class NonCommuting(SpecflagError):
    """A tuple failed commutation certification.

    ``pair`` holds the (0-based) indices of the worst offending pair and
    ``residual`` its normalized commutator norm.
    """

    def __init__(self, msg, pair, residual):
        super().__init__(msg)
        self.pair = pair
        self.residual = residual


class BoundaryAmbiguous(SpecflagError):
    """An eigenvalue lies within the tolerance band of a region boundary."""

    def __init__(self, msg, eigenvalue):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class ResidualTooLarge(SpecflagError):
    """No common eigenvector met the residual tolerance."""


class NotInvariant(SpecflagError):
    """A projection is not invariant under the tuple."""


class NotTriangular(SpecflagError):
    """An operator is not upper triangular with respect to a flag."""


class NilpotencyDisagreement(SpecflagError):
    """The power-norm and eigenvalue nilpotency tests disagree."""


class AtomOutsidePolydisk(SpecflagError):
    """A joint eigenvalue lies outside the curve's polydisk."""


class DomainViolation(SpecflagError):
    """A function was applied outside its domain of definition."""


class SingularAlpha(SpecflagError):
    """The Koszul operator is (numerically) singular at a quadrature node."""


class UnsupportedDimension(SpecflagError):
    """The requested tuple length is not supported by this routine."""


class SingularMatrix(SpecflagError, ValueError):
    """A matrix required to be invertible is numerically singular."""
