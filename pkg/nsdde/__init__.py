"""Truncated Euler–Maruyama simulation and convergence studies for neutral stochastic delay equations."""

from nsdde.errors import NsddeError, NsddeRuntimeFailure, NsddeValidationError

__version__ = "0.1.0"

__all__ = ["NsddeError", "NsddeRuntimeFailure", "NsddeValidationError", "__version__"]
