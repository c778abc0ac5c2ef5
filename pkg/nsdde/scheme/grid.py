from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from nsdde.errors import GridMismatchError, InvalidParameterError
from nsdde.noise.brownian import steps_for


@dataclass(frozen=True)
class TimeGrid:
    """Commensurable grid Δ = τ/m = T/M.

    T must be a positive multiple of Δ, so M >= 1. A zero horizon, where only the
    initial segment would be returned, is rejected rather than treated as M = 0.
    """

    tau: float
    T: float
    m: int

    def __post_init__(self) -> None:
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"delay τ must be positive, got {self.tau}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidParameterError(f"horizon T must be positive, got {self.T}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidParameterError(f"m must be a positive integer, got {self.m}")
        try:
            steps_for(self.T, self.delta)
        except GridMismatchError as e:
            raise GridMismatchError(f"T={self.T} is not an integer multiple of Δ=τ/m={self.delta} (τ={self.tau}, m={self.m})") from e

    @property
    def delta(self) -> float:
        return self.tau / self.m

    @property
    def M(self) -> int:
        return steps_for(self.T, self.delta)

    @property
    def times(self) -> np.ndarray:
        """t_k for k = −m..M."""
        return np.arange(-self.m, self.M + 1, dtype=float) * self.delta

    def index_of(self, t: float) -> int:
        """k with t ∈ [t_k, t_{k+1}), clamped to M at the horizon."""
        if not (-self.tau - 1e-12 * self.tau <= t <= self.T * (1 + 1e-12)):
            raise InvalidParameterError(f"time {t} outside [−τ, T] = [{-self.tau}, {self.T}]")
        k = math.floor(t / self.delta)
        if math.isclose((k + 1) * self.delta, t, rel_tol=1e-12, abs_tol=1e-15):
            k += 1
        return max(-self.m, min(k, self.M))
