"""Exception hierarchy shared by all geocurve modules."""


class GeocurveError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GeocurveError):
    """Invalid input: point outside the chart, bad parameter, malformed data."""


class PairingError(DomainError):
    """Tangent vectors paired at different base points or backends."""


class ImmersionError(GeocurveError):
    """A curve's finite-difference speed collapsed below the immersion threshold.

    ``node`` is the first offending sample index when known.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class PropagationError(ImmersionError):
    """Immersion lost while propagating a path of curves.

    ``step`` is the s-index and ``node`` the t-index where propagation failed.
    """

    def __init__(self, message, step=None, node=None):
        super().__init__(message, node=node)
        self.step = step


class ConvergenceError(GeocurveError):
    """An iterative solver exhausted its iteration budget.

    ``residual`` carries the last residual or gradient norm.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
