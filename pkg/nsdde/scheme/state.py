from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from nsdde.errors import InvalidParameterError
from nsdde.scheme.grid import TimeGrid
from nsdde.truncation.rule import TruncationRule


class DelayState:
    """Ring buffer of y_{t_{k−m}}..y_{t_k} for a batch of paths."""

    def __init__(self, initial: np.ndarray, m: int) -> None:
        # initial: (P, m+1, n), values at k = −m..0
        if initial.shape[1] != m + 1:
            raise InvalidParameterError(f"initial segment must hold m+1={m + 1} values, got {initial.shape[1]}")
        self.m = m
        self.k = 0
        self._buffer = np.empty_like(initial)
        for j in range(-m, 1):
            self._buffer[:, self._slot(j)] = initial[:, j + m]

    def _slot(self, index: int) -> int:
        return index % (self.m + 1)

    def value(self, index: int) -> np.ndarray:
        if not (self.k - self.m <= index <= self.k):
            raise IndexError(f"y_{index} is not in the buffer (k={self.k}, m={self.m})")
        return self._buffer[:, self._slot(index)]

    @property
    def current(self) -> np.ndarray:
        return self.value(self.k)

    @property
    def delayed(self) -> np.ndarray:
        """y_{t_{k−m}}, the value used as Ȳ(t − τ)."""
        return self.value(self.k - self.m)

    @property
    def next_delayed(self) -> np.ndarray:
        """y_{t_{k+1−m}}."""
        return self.value(self.k + 1 - self.m)

    def push(self, y_next: np.ndarray) -> None:
        # y_{k+1} takes the slot of y_{k−m}
        self._buffer[:, self._slot(self.k + 1)] = y_next
        self.k += 1


@dataclass(frozen=True)
class PathRecord:
    """Grid values y_{t_k}, k = −m..M, for a batch of paths: shape (P, m+M+1, n)."""

    values: np.ndarray
    grid: TimeGrid
    seed: int
    path_indices: np.ndarray
    rule: Optional[TruncationRule] = None
    jump_counts: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    def at(self, k: int) -> np.ndarray:
        return self.values[:, k + self.grid.m]

    def step_interpolant(self, t: float) -> np.ndarray:
        """Ȳ(t) = y_{t_k} for t ∈ [t_k, t_{k+1})."""
        return self.at(self.grid.index_of(t))

    def path(self, row: int) -> "PathRecord":
        return PathRecord(
            values=self.values[row : row + 1],
            grid=self.grid,
            seed=self.seed,
            path_indices=self.path_indices[row : row + 1],
            rule=self.rule,
            jump_counts=None if self.jump_counts is None else self.jump_counts[row : row + 1],
        )


def moment_at_T(records: Union[PathRecord, Sequence[PathRecord]], p: float) -> float:
    """Monte Carlo estimate of E|Y(T)|^p."""
    if isinstance(records, PathRecord):
        records = [records]
    terminal = np.concatenate([r.terminal for r in records], axis=0)
    return float(np.mean(np.linalg.norm(terminal, axis=-1) ** p))
