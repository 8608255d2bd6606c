"""Exception hierarchy shared across the toolkit."""


class FGError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(FGError, ValueError):
    """Raised when arguments violate a documented precondition."""


class InvalidMetric(FGError, ValueError):
    """Raised when a Finsler norm is requested outside strong convexity."""


class DegenerateMetric(FGError):
    """Raised when the metric has continuous families of closed geodesics (e.g. the round metric)."""


class IntegrationFailure(FGError, RuntimeError):
    """Raised when the ODE integrator cannot complete (step-size underflow etc.)."""


class BoundaryAmbiguous(FGError):
    """Raised when a conjugate point sits too close to the end of the counting interval."""


class NumericalFailure(FGError, RuntimeError):
    """Raised when a numerical consistency check (e.g. symplecticity) fails."""


class InternalInconsistency(FGError, RuntimeError):
    """Raised when an exact construction fails a guard that should be unreachable."""
