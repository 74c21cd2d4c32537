"""Exception types raised across the package."""


class TogeError(Exception):
    """Base class for all errors raised by toge."""


class PolytopeError(TogeError):
    pass


class NotDelzant(PolytopeError):
    pass


class Unbounded(PolytopeError):
    pass


class EmptyInterior(PolytopeError):
    pass


class DimensionMismatch(TogeError, ValueError):
    pass


class OutsidePolytope(TogeError, ValueError):
    pass


class LatticeOverflow(TogeError):
    """Lattice enumeration would exceed the configured point cap."""


class NumericalError(TogeError):
    """Base for failures of an iterative or quadrature routine."""


class TooCloseToBoundary(NumericalError):
    pass


class NonConvexAt(NumericalError):
    def __init__(self, msg, x=None):
        super().__init__(msg)
        self.x = x


class NewtonDivergence(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    def __init__(self, msg, k=None, alpha=None):
        super().__init__(msg)
        self.k = k
        self.alpha = alpha


class OutsideLattice(TogeError, ValueError):
    pass


class BoundaryLatticePoint(TogeError, ValueError):
    pass


class MissingNormingTable(TogeError, KeyError):
    pass


class DegenerateFit(TogeError):
    pass


class SchemaError(TogeError):
    """Configuration failed validation; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EmptyGrid(TogeError, ValueError):
    """No evaluation point satisfies the grid margin."""
