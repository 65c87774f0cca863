class TVDecompError(Exception):
    """Base class for errors raised by tvdecomp."""


class LocationError(TVDecompError, ValueError):
    """A grid function lives on the wrong set of points."""


class AdmissibilityError(TVDecompError, ValueError):
    """Coefficients violate min(alpha) >= 0 or min(beta) > 0 (ass01)."""


class ConvergenceError(TVDecompError, RuntimeError):
    """Newton iteration hit its cap.

    ``residual`` is the weighted residual norm at the last iterate and
    ``eps`` the regularization level being solved when it gave up.
    """

    def __init__(self, message, residual=float("nan"), eps=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.eps = eps
        self.iterations = iterations


class ConfigError(TVDecompError, ValueError):
    """Invalid experiment config; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
