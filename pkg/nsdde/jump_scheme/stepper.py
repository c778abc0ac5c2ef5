"""Truncated EM for neutral delay equations driven by a compensated Poisson random measure.

Jumps inside (t_k, t_{k+1}] all use the left-endpoint state (Ȳ(s) = y_{t_k}),
and the compensator is subtracted once per step as Δ·∫h_Δ dλ.
"""

from __future__ import annotations

import logging
import math
from typing import List, Sequence, Tuple, Union

import numpy as np

from nsdde.errors import GridMismatchError, InvalidIncrementError, InvalidParameterError, ModeMismatchError
from nsdde.jump_scheme.compensator import CompensatorOracle
from nsdde.model.coefficients import CoefficientSet, InitialSegment
from nsdde.noise.jumps import JumpRealization
from nsdde.scheme.grid import TimeGrid
from nsdde.scheme.state import DelayState, PathRecord
from nsdde.scheme.truncated_em import STEP_TOLERANCE, check_finite, initial_values
from nsdde.truncation.rule import TruncationRule, truncated_coefficients


logger = logging.getLogger("JumpScheme")


def _jump_sum(
    coefficients: CoefficientSet, y_k: np.ndarray, y_km: np.ndarray, marks: np.ndarray, owners: np.ndarray
) -> np.ndarray:
    """Σ_i h_Δ(y_k, y_{k−m}, u_i) per path, accumulated in (path, time) order."""
    total = np.zeros_like(y_k)
    if owners.size:
        values = coefficients.jump(y_k[owners], y_km[owners], marks)
        np.add.at(total, owners, values)
    return total


def _advance(
    state: DelayState,
    coefficients: CoefficientSet,
    delta: float,
    marks: np.ndarray,
    owners: np.ndarray,
    oracle: CompensatorOracle,
) -> np.ndarray:
    y_k, y_km = state.current, state.delayed
    neutral = coefficients.neutral
    jumps = _jump_sum(coefficients, y_k, y_km, marks, owners)
    return (
        ((neutral(state.next_delayed) + (y_k - neutral(y_km))) + coefficients.drift(y_k, y_km) * delta) + jumps
    ) - delta * oracle(y_k, y_km)


def _flatten_marks(jumps_in_interval: Union[np.ndarray, Sequence[np.ndarray]], n_paths: int, mark_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(jumps_in_interval, np.ndarray) and n_paths == 1:
        jumps_in_interval = [jumps_in_interval]
    if len(jumps_in_interval) != n_paths:
        raise InvalidIncrementError(f"expected marks for {n_paths} paths, got {len(jumps_in_interval)}")
    marks, owners = [], []
    for row, path_marks in enumerate(jumps_in_interval):
        path_marks = np.asarray(path_marks, dtype=float).reshape(-1, mark_dim)
        marks.append(path_marks)
        owners.append(np.full(path_marks.shape[0], row, dtype=np.int64))
    return np.concatenate(marks, axis=0), np.concatenate(owners)


def step_jump(
    state: DelayState,
    coefficients: CoefficientSet,
    delta: float,
    jumps_in_interval: Union[np.ndarray, Sequence[np.ndarray]],
    oracle: CompensatorOracle,
) -> np.ndarray:
    """One step; `jumps_in_interval` holds, per path, the marks of jumps in (t_k, t_{k+1}]."""
    if coefficients.jump is None:
        raise ModeMismatchError(f"model '{coefficients.name}' has no jump map h")
    marks, owners = _flatten_marks(jumps_in_interval, state.current.shape[0], coefficients.mark_dim)
    return _advance(state, coefficients, delta, marks, owners, oracle)


def bin_jumps(jumps: Sequence[JumpRealization], grid: TimeGrid) -> Tuple[List[np.ndarray], List[np.ndarray], np.ndarray]:
    """Assign every jump time to its interval (t_k, t_{k+1}].

    Returns per-step marks and owning rows (in path, time order) and the
    (paths, M) table of jump counts.
    """
    n_paths, n_steps = len(jumps), grid.M
    counts = np.zeros((n_paths, n_steps), dtype=np.int64)
    all_steps, all_rows, all_marks = [], [], []
    for row, realization in enumerate(jumps):
        if not math.isclose(realization.horizon, grid.T, rel_tol=1e-12):
            raise GridMismatchError(f"jumps realized on (0, {realization.horizon}], grid horizon is T={grid.T}")
        if len(realization) == 0:
            continue
        k = np.clip(np.ceil(realization.times / grid.delta).astype(np.int64) - 1, 0, n_steps - 1)
        np.add.at(counts[row], k, 1)
        all_steps.append(k)
        all_rows.append(np.full(k.size, row, dtype=np.int64))
        all_marks.append(realization.marks)

    if not all_steps:
        return [np.empty((0, 1))] * n_steps, [np.empty(0, dtype=np.int64)] * n_steps, counts

    steps = np.concatenate(all_steps)
    rows = np.concatenate(all_rows)
    marks = np.concatenate(all_marks, axis=0)
    order = np.argsort(steps, kind="stable")
    steps, rows, marks = steps[order], rows[order], marks[order]
    bounds = np.searchsorted(steps, np.arange(n_steps + 1))
    step_marks = [marks[bounds[k] : bounds[k + 1]] for k in range(n_steps)]
    step_rows = [rows[bounds[k] : bounds[k + 1]] for k in range(n_steps)]
    return step_marks, step_rows, counts


def simulate_jump(
    coefficients: CoefficientSet,
    rule: TruncationRule,
    grid: TimeGrid,
    xi: InitialSegment,
    jumps: Union[JumpRealization, Sequence[JumpRealization]],
    oracle: CompensatorOracle,
) -> PathRecord:
    """Truncated EM over [0, T] for every path in `jumps` (one realization per path)."""
    if rule.mode != "jump":
        raise ModeMismatchError(f"simulate_jump needs a jump-mode rule, got '{rule.mode}'")
    if not math.isclose(rule.delta, grid.delta, rel_tol=STEP_TOLERANCE):
        raise GridMismatchError(f"rule step Δ={rule.delta} differs from grid step Δ={grid.delta}")
    if not (oracle.radius == rule.radius or math.isclose(oracle.radius, rule.radius, rel_tol=1e-12)):
        raise InvalidParameterError(f"compensator built for radius {oracle.radius}, rule has r={rule.radius}")
    if isinstance(jumps, JumpRealization):
        jumps = [jumps]
    if not jumps:
        raise InvalidParameterError("simulate_jump needs at least one jump realization")

    truncated = truncated_coefficients(coefficients, rule)
    n_paths, m = len(jumps), grid.m
    path_indices = np.array([j.path_index for j in jumps], dtype=np.int64)
    step_marks, step_rows, counts = bin_jumps(jumps, grid)
    logger.debug(
        f"Simulating {n_paths} jump paths of '{coefficients.name}': Δ={grid.delta}, g(Δ)={rule.gauge}, "
        f"r={rule.radius}, {int(counts.sum())} jumps"
    )

    initial = initial_values(xi, grid, n_paths, truncated.state_dim)
    values = np.empty((n_paths, m + grid.M + 1, truncated.state_dim))
    values[:, : m + 1] = initial
    state = DelayState(initial, m)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.M):
            y_next = _advance(state, truncated, grid.delta, step_marks[k], step_rows[k], oracle)
            check_finite(y_next, k + 1, path_indices)
            values[:, m + k + 1] = y_next
            state.push(y_next)

    return PathRecord(
        values=values,
        grid=grid,
        seed=jumps[0].seed,
        path_indices=path_indices,
        rule=rule,
        jump_counts=counts,
    )
