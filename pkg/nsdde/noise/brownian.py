from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nsdde.errors import GridMismatchError, InvalidParameterError
from nsdde.noise.streams import BROWNIAN_STREAM, stream_generator, validate_seed


logger = logging.getLogger("NoiseFactory")

# Increments are rounded to multiples of 2^-LATTICE_BITS, so block sums are exact.
LATTICE_BITS = 32
COMMENSURABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BrownianGrid:
    """Brownian increments for a batch of paths, shape (paths, steps, d)."""

    increments: np.ndarray
    step: float
    fine_step: float
    horizon: float
    seed: int
    path_indices: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.increments.shape[1]

    @property
    def noise_dim(self) -> int:
        return self.increments.shape[2]

    @property
    def coarsening(self) -> int:
        """Number of finest increments summed into one current increment."""
        return int(round(self.step / self.fine_step))

    def path(self, row: int) -> "BrownianGrid":
        return BrownianGrid(
            increments=self.increments[row : row + 1],
            step=self.step,
            fine_step=self.fine_step,
            horizon=self.horizon,
            seed=self.seed,
            path_indices=self.path_indices[row : row + 1],
        )


def steps_for(horizon: float, step: float) -> int:
    """Integer count K with K·step = horizon, or GridMismatchError."""
    if not (horizon > 0 and step > 0):
        raise InvalidParameterError(f"horizon and step must be positive, got T={horizon}, δ={step}")
    count = int(round(horizon / step))
    if count < 1 or abs(count * step - horizon) > COMMENSURABILITY_TOLERANCE * horizon:
        raise GridMismatchError(f"horizon {horizon} is not an integer multiple of step {step}")
    return count


def snap_to_lattice(z: np.ndarray) -> np.ndarray:
    return np.ldexp(np.rint(np.ldexp(z, LATTICE_BITS)), -LATTICE_BITS)


def _draw_increments(seed: int, path_index: int, n_steps: int, fine_step: float, noise_dim: int) -> np.ndarray:
    rng = stream_generator(seed, path_index, BROWNIAN_STREAM)
    return snap_to_lattice(rng.standard_normal((n_steps, noise_dim)) * math.sqrt(fine_step))


def sample_brownian(seed: int, path_index: int, T: float, fine_step: float, d: int) -> BrownianGrid:
    return sample_brownian_batch(seed, [path_index], T, fine_step, d)


def sample_brownian_batch(
    seed: int, path_indices: Sequence[int], T: float, fine_step: float, d: int
) -> BrownianGrid:
    """Stack the per-path grids; row i equals sample_brownian(seed, path_indices[i], ...) bitwise."""
    seed = validate_seed(seed)
    if d < 1:
        raise InvalidParameterError(f"noise dimension must be positive, got {d}")
    n_steps = steps_for(T, fine_step)
    indices = np.asarray(list(path_indices), dtype=np.int64)
    increments = np.empty((indices.size, n_steps, d))
    for row, index in enumerate(indices):
        increments[row] = _draw_increments(seed, int(index), n_steps, fine_step, d)
    logger.debug(f"Sampled Brownian grid: {indices.size} paths x {n_steps} steps (δ={fine_step})")
    return BrownianGrid(
        increments=increments,
        step=fine_step,
        fine_step=fine_step,
        horizon=T,
        seed=seed,
        path_indices=indices,
    )


def coarsen(grid: BrownianGrid, factor: int) -> BrownianGrid:
    """Sum consecutive blocks of `factor` increments, in ascending index order."""
    if factor < 1 or grid.n_steps % factor != 0:
        raise GridMismatchError(f"coarsening factor {factor} does not divide {grid.n_steps} increments")
    if factor == 1:
        return grid
    blocks = grid.increments.reshape(grid.increments.shape[0], grid.n_steps // factor, factor, grid.noise_dim)
    summed = blocks[:, :, 0, :].copy()
    for j in range(1, factor):
        summed += blocks[:, :, j, :]
    return BrownianGrid(
        increments=summed,
        step=grid.step * factor,
        fine_step=grid.fine_step,
        horizon=grid.horizon,
        seed=grid.seed,
        path_indices=grid.path_indices,
    )
