"""Step-size gauges, truncation rules and truncated coefficient sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from nsdde.errors import InadmissibleGaugeError, InvalidParameterError, InvalidRadiusError, ModeMismatchError
from nsdde.model.coefficients import CoefficientSet
from nsdde.truncation.bounds import BoundFunction, invert_bound
from nsdde.truncation.projection import truncate_point


MODES = ("brownian", "jump")
REGIMES = ("baseline", "improved")
GAUGE_SLACK = 1e-12

BROWNIAN_INEQUALITY = "Δ^{1/4}·g(Δ) ≤ 1"
JUMP_INEQUALITY = "Δ^{1/4}·g(Δ)^p ≤ 1"
FLOOR_INEQUALITY = "g(Δ) ≥ 1"
DELTA_STAR_INEQUALITY = "f(2) ≤ g(Δ*)"


@dataclass(frozen=True)
class Gauge:
    delta: float
    epsilon: float
    value: float
    mode: str = "brownian"
    p: float = 2.0
    regime: str = "baseline"

    @property
    def exponent(self) -> float:
        """ε_g with g(Δ) = Δ^{−ε_g}."""
        return self.epsilon if self.regime == "baseline" else self.epsilon / 2.0


def _gauge_value(delta: float, epsilon: float, regime: str) -> float:
    exponent = epsilon if regime == "baseline" else epsilon / 2.0
    return delta ** (-exponent)


def _check_admissible(delta: float, value: float, mode: str, p: float) -> None:
    if value < 1.0:
        raise InadmissibleGaugeError(FLOOR_INEQUALITY, f"g({delta}) = {value}")
    if mode == "brownian":
        lhs = delta**0.25 * value
        if lhs > 1.0 + GAUGE_SLACK:
            raise InadmissibleGaugeError(BROWNIAN_INEQUALITY, f"Δ={delta}, g(Δ)={value}, Δ^{{1/4}}·g(Δ)={lhs}")
    else:
        lhs = delta**0.25 * value**p
        if lhs > 1.0 + GAUGE_SLACK:
            raise InadmissibleGaugeError(JUMP_INEQUALITY, f"Δ={delta}, g(Δ)={value}, p={p}, Δ^{{1/4}}·g(Δ)^p={lhs}")


def power_gauge(
    delta: float,
    epsilon: float,
    mode: str = "brownian",
    p: float = 2.0,
    regime: str = "baseline",
) -> Gauge:
    """Power-law gauge g(Δ) = Δ^{−ε} (baseline) or Δ^{−ε/2} (improved), checked for admissibility."""
    if not (0.0 < delta <= 1.0):
        raise InvalidParameterError(f"step Δ must lie in (0, 1], got {delta}")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InvalidParameterError(f"gauge exponent ε must be positive, got {epsilon}")
    if mode not in MODES:
        raise InvalidParameterError(f"gauge mode must be one of {MODES}, got '{mode}'")
    if regime not in REGIMES:
        raise InvalidParameterError(f"gauge regime must be one of {REGIMES}, got '{regime}'")
    if mode == "jump" and not p >= 2:
        raise InvalidParameterError(f"jump-mode moment exponent p must be >= 2, got {p}")

    value = _gauge_value(delta, epsilon, regime)
    _check_admissible(delta, value, mode, p)
    return Gauge(delta=delta, epsilon=epsilon, value=value, mode=mode, p=p, regime=regime)


@dataclass(frozen=True)
class TruncationRule:
    delta: float
    epsilon: float
    gauge: float
    radius: float
    bound: BoundFunction
    mode: str = "brownian"
    p: float = 2.0
    regime: str = "baseline"
    delta_star: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidRadiusError(
                f"truncation radius must be positive, got r={self.radius} (g(Δ)={self.gauge} equals f(0))"
            )

    @classmethod
    def from_gauge(cls, gauge: Gauge, bound: BoundFunction, delta_star: Optional[float] = None) -> "TruncationRule":
        if delta_star is not None:
            if not (0.0 < delta_star <= 1.0) or gauge.delta > delta_star:
                raise InvalidParameterError(f"Δ* must satisfy Δ ≤ Δ* ≤ 1, got Δ={gauge.delta}, Δ*={delta_star}")
            g_star = _gauge_value(delta_star, gauge.epsilon, gauge.regime)
            if bound(2.0) > g_star:
                raise InadmissibleGaugeError(DELTA_STAR_INEQUALITY, f"f(2)={bound(2.0)}, g(Δ*)={g_star}")
        radius = invert_bound(bound, gauge.value)
        return cls(
            delta=gauge.delta,
            epsilon=gauge.epsilon,
            gauge=gauge.value,
            radius=radius,
            bound=bound,
            mode=gauge.mode,
            p=gauge.p,
            regime=gauge.regime,
            delta_star=delta_star,
        )

    @classmethod
    def fixed_radius(cls, delta: float, radius: float, bound: BoundFunction, mode: str = "brownian") -> "TruncationRule":
        """Diagnostic rule with an explicit radius; no gauge admissibility check."""
        if mode not in MODES:
            raise InvalidParameterError(f"gauge mode must be one of {MODES}, got '{mode}'")
        gauge = bound(radius) if math.isfinite(radius) else math.inf
        return cls(delta=delta, epsilon=0.0, gauge=gauge, radius=radius, bound=bound, mode=mode, regime="fixed")

    def describe(self) -> Tuple[float, float, float]:
        return self.delta, self.gauge, self.radius


def build_rule(
    delta: float,
    epsilon: float,
    bound: BoundFunction,
    mode: str = "brownian",
    p: float = 2.0,
    regime: str = "baseline",
    delta_star: Optional[float] = None,
) -> TruncationRule:
    return TruncationRule.from_gauge(power_gauge(delta, epsilon, mode=mode, p=p, regime=regime), bound, delta_star)


def truncated_coefficients(coefficients: CoefficientSet, rule: TruncationRule) -> CoefficientSet:
    """Pre-compose b, σ (or h and its compensator) with the projection at radius r; D stays as is."""
    if coefficients.driver != rule.mode:
        raise ModeMismatchError(
            f"{rule.mode} truncation rule cannot be applied to the {coefficients.driver}-driven model '{coefficients.name}'"
        )
    radius = rule.radius
    drift, diffusion, jump, compensator = (
        coefficients.drift,
        coefficients.diffusion,
        coefficients.jump,
        coefficients.jump_compensator,
    )

    def drift_delta(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return drift(truncate_point(x, radius), truncate_point(y, radius))

    changes = {"drift": drift_delta, "name": f"{coefficients.name}[r={radius:.6g}]"}

    if diffusion is not None:
        def diffusion_delta(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return diffusion(truncate_point(x, radius), truncate_point(y, radius))

        changes["diffusion"] = diffusion_delta

    if jump is not None:
        def jump_delta(x: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
            return jump(truncate_point(x, radius), truncate_point(y, radius), u)

        changes["jump"] = jump_delta

    if compensator is not None:
        def compensator_delta(x: np.ndarray, y: np.ndarray, measure) -> np.ndarray:
            return compensator(truncate_point(x, radius), truncate_point(y, radius), measure)

        changes["jump_compensator"] = compensator_delta

    return coefficients.with_coefficients(**changes)
