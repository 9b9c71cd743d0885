"""Exception hierarchy shared by the gtsprice modules."""


class GtsError(Exception):
    """Base class for every error raised by gtsprice."""


class DomainError(GtsError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NoSolution(GtsError):
    """The martingale equation has no root for the requested rate."""

    def __init__(self, message, r_range=None):
        super().__init__(message)
        self.r_range = r_range


class InvalidMeasure(GtsError):
    """A shifted measure leaves the region where its MGF is finite."""


class TruncationError(GtsError):
    """A Fourier grid is too narrow for the integrand to have decayed."""


class OutOfRange(GtsError, ValueError):
    """A query point lies outside the span of a grid."""


class DataOutOfRange(OutOfRange):
    """An observation lies outside the density grid used for likelihoods."""


class ContourError(GtsError):
    """The contour integral left an imaginary residual above tolerance."""


class QuadratureError(GtsError):
    """The integrand produced a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NonFinite(GtsError):
    """The log-likelihood became non-finite during fitting."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ParseError(GtsError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptySeries(GtsError, ValueError):
    """A price or return series has too few observations."""
