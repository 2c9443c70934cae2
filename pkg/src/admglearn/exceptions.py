"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid distribution or model parameters (bad shape, not PD, beta <= 0, ...)."""


class EstimationError(RuntimeError):
    """An estimator could not produce a result (degenerate input, all columns failed)."""


class NumericError(RuntimeError):
    """A numeric subroutine failed (singular solve, non-finite objective)."""
