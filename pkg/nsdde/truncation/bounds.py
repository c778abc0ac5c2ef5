"""Bound functions f dominating the coefficients on centred balls, and f⁻¹."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from nsdde.errors import BelowDomainError, InvalidParameterError, UnboundedSearchError
from nsdde.model.coefficients import CoefficientSet

if TYPE_CHECKING:
    from nsdde.noise.jumps import MarkMeasure


MAX_DOUBLINGS = 2**10
INVERSE_TOLERANCE = 1e-12
MONOTONE_SLOPE = 1e-9


@dataclass(frozen=True)
class BoundFunction:
    """Strictly increasing continuous f: [0, ∞) → [0, ∞)."""

    fn: Callable[[float], float]
    strictly_increasing: bool = True
    source: str = "closed-form"

    lower: float = 0.0

    def __call__(self, r: float) -> float:
        return float(self.fn(float(r)))

    def is_increasing_on(self, radii: Sequence[float]) -> bool:
        values = np.array([self(r) for r in sorted(radii)])
        return bool(np.all(np.diff(values) > 0))

    @classmethod
    def for_model(cls, coefficients: CoefficientSet, measure: Optional["MarkMeasure"] = None) -> "BoundFunction":
        if coefficients.bound is not None:
            return cls(coefficients.bound, source="closed-form")
        return cls.from_samples(coefficients, measure=measure)

    @classmethod
    def from_samples(
        cls,
        coefficients: CoefficientSet,
        radii: Optional[Sequence[float]] = None,
        n_directions: int = 256,
        seed: int = 0,
        measure: Optional["MarkMeasure"] = None,
    ) -> "BoundFunction":
        """Running maximum of coefficient magnitudes over sampled balls, made strictly increasing.

        A numerical estimate: domination holds at the sampled points only.
        """
        grid = np.unique(np.concatenate([[0.0], np.asarray(radii if radii is not None else np.geomspace(1e-3, 1e3, 121), float)]))
        rng = np.random.default_rng(seed)
        n = coefficients.state_dim
        peaks = np.empty(grid.size)
        for i, radius in enumerate(grid):
            directions = rng.standard_normal((2, n_directions, n))
            directions /= np.maximum(np.linalg.norm(directions, axis=-1, keepdims=True), 1e-300)
            scales = radius * rng.uniform(0.0, 1.0, (2, n_directions, 1))
            scales[:, 0] = radius
            x, y = directions[0] * scales[0], directions[1] * scales[1]
            peaks[i] = _coefficient_magnitude(coefficients, x, y, measure)
        running = np.maximum.accumulate(peaks)
        # value at the next grid radius, so each interval is dominated from above
        ahead = np.append(running[1:], running[-1])
        r_max = grid[-1]

        def fn(r: float) -> float:
            if r <= r_max:
                base = float(np.interp(r, grid, ahead))
            else:
                base = float(ahead[-1] * (r / r_max) ** 3)
            return base + MONOTONE_SLOPE * r

        return cls(fn, source="sampled")


def _coefficient_magnitude(
    coefficients: CoefficientSet, x: np.ndarray, y: np.ndarray, measure: Optional["MarkMeasure"]
) -> float:
    peak = float(np.max(np.linalg.norm(coefficients.drift(x, y), axis=-1)))
    if coefficients.diffusion is not None:
        sigma = coefficients.diffusion(x, y)
        peak = max(peak, float(np.max(np.linalg.norm(sigma, axis=(-2, -1)))))
    if coefficients.jump is not None and measure is not None:
        marks = measure.bounded_marks()
        xs = np.repeat(x, len(marks), axis=0)
        ys = np.repeat(y, len(marks), axis=0)
        us = np.tile(marks, (len(x), 1))
        peak = max(peak, float(np.max(np.linalg.norm(coefficients.jump(xs, ys, us), axis=-1))))
    return peak


def _value(f: BoundFunction, r: float) -> float:
    try:
        return f(r)
    except OverflowError:
        return math.inf


def invert_bound(f: BoundFunction, v: float) -> float:
    """Return r with f(r) = v, by bracket doubling from r = 1 and bisection."""
    f0 = f(0.0)
    if not math.isfinite(v) or v < f0:
        raise BelowDomainError(f"cannot invert bound function at v={v}: below f(0)={f0}")
    if v == f0:
        return 0.0

    lo, hi = 0.0, 1.0
    doublings = 0
    while _value(f, hi) < v:
        # 2^1024 overflows, so the last finite bracket end is 2^1023
        if doublings >= MAX_DOUBLINGS or not math.isfinite(hi * 2.0):
            raise UnboundedSearchError(
                f"no bracket for f(r) = {v} after {doublings} doublings (f({hi}) = {_value(f, hi)})"
            )
        lo, hi = hi, hi * 2.0
        doublings += 1
    if _value(f, hi) == v:
        return hi

    root = optimize.bisect(
        lambda r: _value(f, r) - v,
        lo,
        hi,
        xtol=1e-300,
        rtol=4 * np.finfo(float).eps,
        maxiter=2000,
    )
    residual = abs(f(root) - v)
    if residual > max(INVERSE_TOLERANCE, INVERSE_TOLERANCE * v):
        raise InvalidParameterError(
            f"bound function is not continuous near r={root}: |f(r) - v| = {residual}"
        )
    return float(root)
