"""Truncated Euler–Maruyama for Brownian-driven neutral delay equations.

The neutral difference z_k = y_k − D(y_{k−m}) is advanced explicitly and
y_{k+1} is recovered as D(y_{k+1−m}) + z_{k+1}; no implicit solve is needed.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from nsdde.errors import GridMismatchError, InvalidIncrementError, InvalidParameterError, ModeMismatchError, NumericalBlowupError
from nsdde.model.coefficients import CoefficientSet, InitialSegment
from nsdde.noise.brownian import BrownianGrid, coarsen
from nsdde.scheme.grid import TimeGrid
from nsdde.scheme.state import DelayState, PathRecord
from nsdde.truncation.rule import TruncationRule, truncated_coefficients


logger = logging.getLogger("TruncatedScheme")

STEP_TOLERANCE = 1e-9


def step(state: DelayState, coefficients: CoefficientSet, delta: float, dW: np.ndarray) -> np.ndarray:
    """One step y_{t_k} -> y_{t_{k+1}} for every path in the batch."""
    if coefficients.diffusion is None:
        raise ModeMismatchError(f"model '{coefficients.name}' has no diffusion; use the jump scheme")
    y_k = state.current
    dW = np.asarray(dW, dtype=float)
    if dW.ndim == 1:
        dW = dW.reshape(1, -1)
    if dW.shape != (y_k.shape[0], coefficients.noise_dim):
        raise InvalidIncrementError(
            f"increment shape {dW.shape} does not match (paths, d) = ({y_k.shape[0]}, {coefficients.noise_dim})"
        )
    y_km = state.delayed
    neutral = coefficients.neutral
    sigma = coefficients.diffusion(y_k, y_km)
    return ((neutral(state.next_delayed) + (y_k - neutral(y_km))) + coefficients.drift(y_k, y_km) * delta) + np.einsum(
        "pij,pj->pi", sigma, dW
    )


def initial_values(xi: InitialSegment, grid: TimeGrid, n_paths: int, state_dim: int) -> np.ndarray:
    if xi.state_dim != state_dim:
        raise InvalidParameterError(f"initial segment has dimension {xi.state_dim}, model has {state_dim}")
    if not math.isclose(xi.tau, grid.tau, rel_tol=1e-12):
        raise GridMismatchError(f"initial segment delay τ={xi.tau} differs from grid τ={grid.tau}")
    return np.broadcast_to(xi.on_grid(grid.m), (n_paths, grid.m + 1, state_dim)).copy()


def check_finite(y_next: np.ndarray, k: int, path_indices: np.ndarray) -> None:
    finite = np.all(np.isfinite(y_next), axis=-1)
    if not finite.all():
        row = int(np.argmin(finite))
        raise NumericalBlowupError(step=k, path_index=int(path_indices[row]))


def coarse_increments(noise: BrownianGrid, grid: TimeGrid, noise_dim: int) -> np.ndarray:
    """Increments of `noise` summed to step Δ, shape (paths, M, d)."""
    factor = int(round(grid.delta / noise.step))
    if factor < 1 or abs(factor * noise.step - grid.delta) > STEP_TOLERANCE * grid.delta:
        raise GridMismatchError(f"step Δ={grid.delta} is not a multiple of the noise step {noise.step}")
    coarse = coarsen(noise, factor)
    if coarse.n_steps != grid.M:
        raise GridMismatchError(
            f"noise covers {coarse.n_steps} steps of Δ={grid.delta}, grid needs M={grid.M} (T={grid.T})"
        )
    if coarse.noise_dim != noise_dim:
        raise InvalidIncrementError(f"noise has dimension {coarse.noise_dim}, model expects d={noise_dim}")
    return coarse.increments


def _integrate(
    coefficients: CoefficientSet,
    grid: TimeGrid,
    xi: InitialSegment,
    noise: BrownianGrid,
    rule: Optional[TruncationRule],
) -> PathRecord:
    increments = coarse_increments(noise, grid, coefficients.noise_dim)
    n_paths, m = increments.shape[0], grid.m
    initial = initial_values(xi, grid, n_paths, coefficients.state_dim)

    values = np.empty((n_paths, m + grid.M + 1, coefficients.state_dim))
    values[:, : m + 1] = initial
    state = DelayState(initial, m)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.M):
            y_next = step(state, coefficients, grid.delta, increments[:, k])
            check_finite(y_next, k + 1, noise.path_indices)
            values[:, m + k + 1] = y_next
            state.push(y_next)

    return PathRecord(values=values, grid=grid, seed=noise.seed, path_indices=noise.path_indices, rule=rule)


def simulate(
    coefficients: CoefficientSet,
    rule: TruncationRule,
    grid: TimeGrid,
    xi: InitialSegment,
    noise: BrownianGrid,
) -> PathRecord:
    """Truncated EM over [0, T] for every path in `noise`."""
    if rule.mode != "brownian":
        raise ModeMismatchError(f"simulate needs a brownian-mode rule, got '{rule.mode}'")
    if not math.isclose(rule.delta, grid.delta, rel_tol=STEP_TOLERANCE):
        raise GridMismatchError(f"rule step Δ={rule.delta} differs from grid step Δ={grid.delta}")
    truncated = truncated_coefficients(coefficients, rule)
    logger.debug(
        f"Simulating {noise.increments.shape[0]} paths of '{coefficients.name}': "
        f"Δ={grid.delta}, g(Δ)={rule.gauge}, r={rule.radius}, M={grid.M}"
    )
    return _integrate(truncated, grid, xi, noise, rule)


def simulate_untruncated(
    coefficients: CoefficientSet,
    grid: TimeGrid,
    xi: InitialSegment,
    noise: BrownianGrid,
) -> PathRecord:
    """Plain EM with the raw coefficients."""
    if coefficients.diffusion is None:
        raise ModeMismatchError(f"model '{coefficients.name}' has no diffusion; use the jump scheme")
    return _integrate(coefficients, grid, xi, noise, None)
