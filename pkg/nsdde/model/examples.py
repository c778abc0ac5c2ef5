"""Built-in scalar example models.

Each factory returns a `CoefficientSet` carrying a closed-form bound
function. The matching local Lipschitz maps are used by the audit only.
"""

from __future__ import annotations

import math
from typing import Callable, TYPE_CHECKING

import numpy as np

from nsdde.errors import InvalidParameterError
from nsdde.model.coefficients import CoefficientSet

if TYPE_CHECKING:
    from nsdde.noise.jumps import MarkMeasure


KAPPA_FLOOR = 1e-6


def _check_contraction_parameter(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and abs(value) < 1.0):
        raise InvalidParameterError(f"parameter {name} must satisfy |{name}| < 1, got {value}")
    return value


def make_example_A(a: float = 0.5) -> CoefficientSet:
    """D(y) = −a·y, b(x,y) = z − z³, σ(x,y) = |z|^{3/2} with z = x + a·y."""
    a = _check_contraction_parameter("a", a)
    spread = 1.0 + abs(a)

    def neutral(y: np.ndarray) -> np.ndarray:
        return -a * y

    def drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        z = x + a * y
        return z - z**3

    def diffusion(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        z = x + a * y
        return (np.abs(z) ** 1.5)[..., np.newaxis]

    def bound(r: float) -> float:
        s = spread * r
        return max(s + s**3, s**1.5)

    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=neutral,
        drift=drift,
        diffusion=diffusion,
        kappa=max(abs(a), KAPPA_FLOOR),
        bound=bound,
        name="example-a",
        params={"a": a},
    )


def make_example_B() -> CoefficientSet:
    """D(y) = sin(y)/2, b(x,y) = x − x³ + cos y, σ(x,y) = |x|^{3/2}."""

    def neutral(y: np.ndarray) -> np.ndarray:
        return 0.5 * np.sin(y)

    def drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return x - x**3 + np.cos(y)

    def diffusion(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (np.abs(x) ** 1.5)[..., np.newaxis]

    def bound(r: float) -> float:
        return max(1.0 + r + r**3, r**1.5)

    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=neutral,
        drift=drift,
        diffusion=diffusion,
        kappa=0.5,
        bound=bound,
        name="example-b",
    )


def make_example_jump(c: float = 0.25) -> CoefficientSet:
    """D(y) = c·sin y, b(x,y) = x − x³ + cos y, h(x,y,u) = u·min(1, |x|)."""
    c = _check_contraction_parameter("c", c)

    def neutral(y: np.ndarray) -> np.ndarray:
        return c * np.sin(y)

    def drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return x - x**3 + np.cos(y)

    def jump(x: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        return u * np.minimum(1.0, np.abs(x))

    def compensator(x: np.ndarray, y: np.ndarray, measure: "MarkMeasure") -> np.ndarray:
        return measure.total_mass * float(measure.mean[0]) * np.minimum(1.0, np.abs(x))

    def bound(r: float) -> float:
        # |h| <= 1 for |u| <= 1, already below 1 + r + r³
        return 1.0 + r + r**3

    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=neutral,
        drift=drift,
        jump=jump,
        jump_compensator=compensator,
        kappa=max(abs(c), KAPPA_FLOOR),
        bound=bound,
        name="example-jump",
        params={"c": c},
    )


def local_lipschitz_A(a: float = 0.5) -> Callable[[float], float]:
    spread = 1.0 + abs(a)

    def lipschitz(radius: float) -> float:
        return max(1.0 + 3.0 * (spread * radius) ** 2, 1.5 * math.sqrt(spread * radius))

    return lipschitz


def local_lipschitz_B() -> Callable[[float], float]:
    def lipschitz(radius: float) -> float:
        return max(1.0 + 3.0 * radius**2, 1.5 * math.sqrt(radius))

    return lipschitz


def local_lipschitz_jump(c: float = 0.25) -> Callable[[float], float]:
    return local_lipschitz_B()
