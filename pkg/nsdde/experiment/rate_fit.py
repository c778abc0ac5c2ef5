"""Log-log regression of root errors on step sizes, with a path bootstrap."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from nsdde.errors import InvalidParameterError, NotFittableError
from nsdde.noise.streams import BOOTSTRAP_STREAM, stream_generator


DEFAULT_BOOTSTRAP = 1000
CI_LEVEL = 0.95


@dataclass(frozen=True)
class RateFit:
    """Slope of log(root error) on log Δ.

    `moment_slope` is the same fit read as the exponent of Δ in E[err^q],
    the form in which the theorem orders are stated.
    """

    slope: float
    intercept: float
    r2: float
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    q: float = 2.0

    @property
    def moment_slope(self) -> float:
        return self.q * self.slope

    @property
    def moment_ci(self) -> Tuple[Optional[float], Optional[float]]:
        if self.ci_lo is None or self.ci_hi is None:
            return None, None
        return self.q * self.ci_lo, self.q * self.ci_hi


def _log_points(points: Sequence[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    if len(points) < 2:
        raise NotFittableError(f"a rate needs at least 2 levels, got {len(points)}")
    deltas = np.array([p[0] for p in points], dtype=float)
    errors = np.array([p[1] for p in points], dtype=float)
    if np.any(deltas <= 0):
        raise InvalidParameterError(f"step sizes must be positive, got {deltas}")
    if np.unique(deltas).size != deltas.size:
        raise InvalidParameterError(f"step sizes must be distinct, got {deltas}")
    if not np.all(np.isfinite(errors)) or np.any(errors <= 0):
        raise NotFittableError(f"log-log fit undefined: root errors must be positive, got {errors}")
    return np.log(deltas), np.log(errors)


def _slopes(log_delta: np.ndarray, log_errors: np.ndarray) -> np.ndarray:
    """Closed-form OLS slope for each row of log_errors."""
    centred = log_delta - log_delta.mean()
    return (log_errors - log_errors.mean(axis=-1, keepdims=True)) @ centred / (centred @ centred)


def fit_rate(
    points: Sequence[Tuple[float, float]],
    path_errors: Optional[np.ndarray] = None,
    q: float = 2.0,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
) -> RateFit:
    """Fit log(root error) = slope·log Δ + intercept.

    With per-path errors of shape (levels, paths), the confidence interval
    resamples paths (jointly across levels) and re-aggregates the q-th moment.
    """
    if not q > 0:
        raise InvalidParameterError(f"error exponent q must be positive, got {q}")
    log_delta, log_errors = _log_points(points)
    slope, intercept = np.polyfit(log_delta, log_errors, 1)
    residual = log_errors - (slope * log_delta + intercept)
    ss_tot = float(np.sum((log_errors - log_errors.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(residual**2)) / ss_tot

    if path_errors is None:
        return RateFit(float(slope), float(intercept), r2, q=float(q))

    path_errors = np.asarray(path_errors, dtype=float)
    if path_errors.shape[0] != log_delta.size:
        raise InvalidParameterError(f"path errors have {path_errors.shape[0]} levels, points have {log_delta.size}")
    n_paths = path_errors.shape[1]
    rng = stream_generator(seed, 0, BOOTSTRAP_STREAM)
    resample = rng.integers(0, n_paths, size=(n_boot, n_paths))
    powered = path_errors**q
    with np.errstate(divide="ignore"):
        log_roots = np.stack([np.log(powered[j][resample].mean(axis=1)) / q for j in range(log_delta.size)], axis=1)
    boot = _slopes(log_delta, log_roots)
    boot = boot[np.isfinite(boot)]
    if boot.size == 0:
        return RateFit(float(slope), float(intercept), r2, q=float(q))
    tail = 100 * (1 - CI_LEVEL) / 2
    ci_lo, ci_hi = np.percentile(boot, [tail, 100 - tail])
    return RateFit(float(slope), float(intercept), r2, float(ci_lo), float(ci_hi), float(q))
