"""Exception types shared across the package."""


class NumericsError(Exception):
    """Base class for numerical failures."""


class AccuracyError(NumericsError):
    """Quadrature could not reach the requested tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(NumericsError):
    """Root bracket has no sign change, or bracket expansion failed."""


class ConvergenceError(NumericsError):
    """Iterative solver did not converge. Best iterate attached when available."""

    def __init__(self, message: str, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class DegenerateEtaError(ValueError):
    """Constant local volatility where a non-constant one is required."""


class InfeasibleStrikeError(NumericsError):
    """No terminal asset level solves the endpoint equation for the given (z, K)."""


class DegenerateModelError(ValueError):
    """Model parameters make an expansion or limit formula undefined."""


class ArbitrageError(ValueError):
    """Option price lies outside the static no-arbitrage band."""


class PrecisionWarning(UserWarning):
    """Result returned at reduced precision (flat vega, bracket floor, ...)."""
