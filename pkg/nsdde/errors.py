"""Exception hierarchy shared by every nsdde module.

Validation errors are raised before any simulation work starts (CLI exit 1);
runtime failures happen mid-computation (CLI exit 2).
"""

from __future__ import annotations

from typing import Optional


class NsddeError(RuntimeError):
    """Base exception for nsdde errors."""


class NsddeValidationError(NsddeError):
    """A precondition on parameters, grids or models does not hold."""


class NsddeRuntimeFailure(NsddeError):
    """A computation started but could not produce a trustworthy result."""


class InvalidParameterError(NsddeValidationError):
    pass


class InvalidRadiusError(NsddeValidationError):
    pass


class InadmissibleGaugeError(NsddeValidationError):
    def __init__(self, inequality: str, detail: str) -> None:
        super().__init__(f"inadmissible gauge: {inequality} violated ({detail})")
        self.inequality = inequality


class BelowDomainError(NsddeValidationError):
    pass


class ModeMismatchError(NsddeValidationError):
    pass


class GridMismatchError(NsddeValidationError):
    pass


class InvalidIntensityError(NsddeValidationError):
    pass


class InvalidIncrementError(NsddeValidationError):
    pass


class UnsupportedAssumptionError(NsddeValidationError):
    pass


class InapplicableAssumptionError(NsddeValidationError):
    pass


class UnknownModelError(NsddeValidationError):
    pass


class UnboundedSearchError(NsddeRuntimeFailure):
    pass


class NotFittableError(NsddeRuntimeFailure):
    pass


class NumericalBlowupError(NsddeRuntimeFailure):
    def __init__(self, step: int, path_index: Optional[int] = None, level: Optional[int] = None) -> None:
        where = f"step k={step}"
        if path_index is not None:
            where += f", path {path_index}"
        if level is not None:
            where += f", level m={level}"
        super().__init__(f"numerical blowup: non-finite state at {where}")
        self.step = step
        self.path_index = path_index
        self.level = level

    def at_level(self, level: int) -> "NumericalBlowupError":
        return NumericalBlowupError(self.step, self.path_index, level)
