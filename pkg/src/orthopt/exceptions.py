"""Exception types raised across the package."""


class OrthoptError(Exception):
    """Base class for all package errors."""


class ShapeError(OrthoptError, ValueError):
    """Operands have incompatible shapes."""


class DegeneracyError(OrthoptError, ArithmeticError):
    """A factorization hit a (numerically) rank-deficient column."""


class ProjectionError(OrthoptError, ArithmeticError):
    """Newton-Schulz projection failed to converge.

    The final residual ``||R R^H - I||`` is kept on ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DegeneratePolynomialError(OrthoptError, ValueError):
    """The polynomial has no nonzero coefficient (or no roots to select from)."""


class NumericalError(OrthoptError, ArithmeticError):
    """A non-finite value appeared in an input or intermediate result."""


class NotOnManifoldError(OrthoptError, ValueError):
    """A matrix failed Stiefel certification."""


class UnsupportedMetricError(OrthoptError, ValueError):
    """The requested metric needs data the problem does not carry."""
