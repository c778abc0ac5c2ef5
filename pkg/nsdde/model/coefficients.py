"""Coefficient sets, assumption constants and initial segments for NSDDEs.

All coefficient callables are vectorised over a leading batch axis:

- ``neutral(y)``: (P, n) -> (P, n)
- ``drift(x, y)``: (P, n), (P, n) -> (P, n)
- ``diffusion(x, y)``: (P, n), (P, n) -> (P, n, d)
- ``jump(x, y, u)``: (J, n), (J, n), (J, mark_dim) -> (J, n)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional

import numpy as np

from nsdde.errors import InvalidParameterError

if TYPE_CHECKING:
    from nsdde.noise.jumps import MarkMeasure


ArrayFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class CoefficientSet:
    """The model (D, b, σ or h) of d[X(t) − D(X(t−τ))] = b dt + σ dW  (or + ∫h dÑ)."""

    state_dim: int
    noise_dim: int
    neutral: ArrayFn
    drift: ArrayFn
    kappa: float
    diffusion: Optional[ArrayFn] = None
    jump: Optional[ArrayFn] = None
    mark_dim: int = 1
    # (x, y, measure) -> ∫ h(x, y, u) λ(du); optional closed form
    jump_compensator: Optional[Callable[[np.ndarray, np.ndarray, "MarkMeasure"], np.ndarray]] = None
    # closed-form bound function r -> f(r), if the model knows one
    bound: Optional[Callable[[float], float]] = None
    name: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.state_dim < 1 or self.noise_dim < 1:
            raise InvalidParameterError(
                f"state_dim and noise_dim must be positive, got n={self.state_dim}, d={self.noise_dim}"
            )
        if (self.diffusion is None) == (self.jump is None):
            raise InvalidParameterError(
                "exactly one of diffusion (σ) or jump map (h) must be given; "
                "Brownian and jump-driven models are treated separately"
            )
        if not (0.0 < self.kappa < 1.0):
            raise InvalidParameterError(f"contraction constant κ must lie in (0,1), got {self.kappa}")
        d_at_zero = np.asarray(self.neutral(np.zeros((1, self.state_dim))), dtype=float)
        if not np.all(d_at_zero == 0.0):
            raise InvalidParameterError(f"neutral map must satisfy D(0) = 0, got D(0) = {d_at_zero.ravel()}")

    @property
    def driver(self) -> str:
        return "brownian" if self.diffusion is not None else "jump"

    def with_coefficients(self, **changes: Any) -> "CoefficientSet":
        return replace(self, **changes)


@dataclass(frozen=True)
class AssumptionParams:
    """Model-declared exponents and constants for (A1)-(A8), (B1)-(B2).

    Constants left as None are simply not declared; auditing an assumption
    that needs a missing constant raises InvalidParameterError.
    """

    p: float = 3.0
    q: float = 2.0
    l: float = 1.0
    L1: Optional[float] = None
    L1_bar: Optional[float] = None
    L2: Optional[float] = None
    L3: Optional[float] = None
    L4: Optional[float] = None
    L: Optional[float] = None
    K1: Optional[float] = None
    K2: Optional[float] = None
    local_lipschitz: Optional[Callable[[float], float]] = None

    def __post_init__(self) -> None:
        if not self.p > 2:
            raise InvalidParameterError(f"moment exponent p must be > 2, got {self.p}")
        if not self.q >= 2:
            raise InvalidParameterError(f"error exponent q must be >= 2, got {self.q}")
        if not self.l >= 1:
            raise InvalidParameterError(f"growth exponent l must be >= 1, got {self.l}")
        for name in ("L1", "L1_bar", "L2", "L3", "L4", "L", "K1", "K2"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidParameterError(f"constant {name} must be positive, got {value}")

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise InvalidParameterError(f"assumption constant {name} is not declared")
        return float(value)

    def rate_precondition_warnings(self) -> List[str]:
        """Return the violated preconditions of the rate theorems (q < p, q·l < 2p)."""
        problems = []
        if not self.q < self.p:
            problems.append(f"q < p fails (q={self.q}, p={self.p})")
        if not self.q * self.l < 2 * self.p:
            problems.append(f"q·l < 2p fails (q={self.q}, l={self.l}, p={self.p})")
        return problems


@dataclass(frozen=True)
class InitialSegment:
    """Initial data ξ on [−τ, 0], sampled only at grid points kΔ."""

    tau: float
    sampler: Callable[[np.ndarray], np.ndarray]
    state_dim: int = 1

    def __post_init__(self) -> None:
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"delay τ must be positive and finite, got {self.tau}")

    @classmethod
    def constant(cls, tau: float, value: Any) -> "InitialSegment":
        vec = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(tau=tau, sampler=lambda t: np.broadcast_to(vec, (len(t), vec.size)).copy(), state_dim=vec.size)

    def on_grid(self, m: int) -> np.ndarray:
        """Values ξ(kΔ) for k = −m..0 with Δ = τ/m, shape (m+1, n)."""
        if m < 1:
            raise InvalidParameterError(f"m must be a positive integer, got {m}")
        delta = self.tau / m
        times = np.arange(-m, 1, dtype=float) * delta
        values = np.asarray(self.sampler(times), dtype=float).reshape(m + 1, self.state_dim)
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("initial segment ξ has non-finite values on the grid")
        return values

    def sup_norm(self, m: int) -> float:
        return float(np.max(np.linalg.norm(self.on_grid(m), axis=-1)))
