"""Finite-intensity Poisson random measures: mark laws and jump realizations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy import special

from nsdde.errors import InvalidIntensityError, InvalidParameterError
from nsdde.noise.streams import JUMP_STREAM, stream_generator, validate_seed


logger = logging.getLogger("NoiseFactory")

MARK_KINDS = ("point", "gauss", "uniform")
DEFAULT_QUADRATURE_NODES = 48


@dataclass(frozen=True)
class MarkDistribution:
    """Normalised scalar mark law: point:c, gauss:s or uniform:a,b."""

    kind: str
    params: Tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in MARK_KINDS:
            raise InvalidParameterError(f"unknown mark distribution '{self.kind}' (expected one of {MARK_KINDS})")
        expected = {"point": 1, "gauss": 1, "uniform": 2}[self.kind]
        if len(self.params) != expected or not all(math.isfinite(v) for v in self.params):
            raise InvalidParameterError(f"mark distribution '{self.kind}' takes {expected} finite parameter(s), got {self.params}")
        if self.kind == "gauss" and not self.params[0] > 0:
            raise InvalidParameterError(f"gauss scale must be positive, got {self.params[0]}")
        if self.kind == "uniform" and not self.params[0] < self.params[1]:
            raise InvalidParameterError(f"uniform bounds must satisfy a < b, got {self.params}")

    @classmethod
    def parse(cls, text: str) -> "MarkDistribution":
        kind, _, rest = text.strip().partition(":")
        if not rest:
            raise InvalidParameterError(f"mark distribution must look like kind:params, got '{text}'")
        try:
            params = tuple(float(v) for v in rest.split(","))
        except ValueError as e:
            raise InvalidParameterError(f"mark distribution parameters must be numbers, got '{rest}'") from e
        return cls(kind.strip().lower(), params)

    def __str__(self) -> str:
        return f"{self.kind}:{','.join(format(v, 'g') for v in self.params)}"

    @property
    def mean(self) -> float:
        if self.kind == "point":
            return self.params[0]
        if self.kind == "gauss":
            return 0.0
        return 0.5 * (self.params[0] + self.params[1])

    @property
    def support_radius(self) -> float:
        if self.kind == "point":
            return abs(self.params[0])
        if self.kind == "gauss":
            return math.inf
        return max(abs(self.params[0]), abs(self.params[1]))

    def abs_moment(self, p: float) -> float:
        """E|u|^p under the normalised law."""
        if self.kind == "point":
            return abs(self.params[0]) ** p
        if self.kind == "gauss":
            s = self.params[0]
            return s**p * 2 ** (p / 2) * special.gamma((p + 1) / 2) / math.sqrt(math.pi)
        a, b = self.params

        def antiderivative(u: float) -> float:
            return math.copysign(abs(u) ** (p + 1), u) / (p + 1)

        return (antiderivative(b) - antiderivative(a)) / (b - a)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "point":
            return np.full(size, self.params[0])
        if self.kind == "gauss":
            return self.params[0] * rng.standard_normal(size)
        return rng.uniform(self.params[0], self.params[1], size)

    def quadrature(self, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and probability weights (summing to 1)."""
        if self.kind == "point":
            return np.array([self.params[0]]), np.array([1.0])
        if self.kind == "gauss":
            nodes, weights = hermegauss(n_nodes)
            return self.params[0] * nodes, weights / weights.sum()
        a, b = self.params
        nodes, weights = leggauss(n_nodes)
        return 0.5 * (a + b) + 0.5 * (b - a) * nodes, weights / weights.sum()


@dataclass(frozen=True)
class MarkMeasure:
    """λ(du) = λ̄·law(du) on a scalar mark space."""

    total_mass: float
    distribution: MarkDistribution
    n_nodes: int = DEFAULT_QUADRATURE_NODES
    mark_dim: int = field(default=1, init=False)

    def __post_init__(self) -> None:
        if not (self.total_mass >= 0 and math.isfinite(self.total_mass)):
            raise InvalidIntensityError(f"jump intensity λ̄ must be finite and >= 0, got {self.total_mass}")

    @classmethod
    def parse(cls, intensity: float, text: str) -> "MarkMeasure":
        return cls(float(intensity), MarkDistribution.parse(text))

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.distribution.mean])

    @property
    def support_radius(self) -> float:
        return self.distribution.support_radius

    def moment(self, p: float) -> float:
        """∫|u|^p λ(du)."""
        return self.total_mass * self.distribution.abs_moment(p)

    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes of shape (Q, 1) and nonnegative weights summing to λ̄."""
        nodes, weights = self.distribution.quadrature(self.n_nodes)
        return nodes.reshape(-1, 1), self.total_mass * weights

    def bounded_marks(self) -> np.ndarray:
        """Marks over which bound functions must dominate h: the support, or |u| ≤ 1 for unbounded laws."""
        radius = self.support_radius if math.isfinite(self.support_radius) else 1.0
        nodes, _ = self.quadrature()
        inside = nodes[np.abs(nodes[:, 0]) <= radius]
        edges = np.array([[-radius], [radius]]) if self.distribution.kind != "point" else nodes
        return np.vstack([inside, edges])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.distribution.sample(rng, size).reshape(size, 1)


@dataclass(frozen=True)
class JumpRealization:
    times: np.ndarray
    marks: np.ndarray
    horizon: float
    intensity: float
    seed: int
    path_index: int

    def __len__(self) -> int:
        return int(self.times.size)

    @classmethod
    def empty(cls, horizon: float, seed: int = 0, path_index: int = 0, mark_dim: int = 1) -> "JumpRealization":
        return cls(np.empty(0), np.empty((0, mark_dim)), horizon, 0.0, seed, path_index)


def sample_jumps(seed: int, path_index: int, T: float, measure: MarkMeasure) -> JumpRealization:
    """Poisson(λ̄T) count, then sorted uniform times on (0, T] and i.i.d. marks."""
    seed = validate_seed(seed)
    if not (T > 0 and math.isfinite(T)):
        raise InvalidParameterError(f"horizon T must be positive, got {T}")
    rng = stream_generator(seed, path_index, JUMP_STREAM)
    count = int(rng.poisson(measure.total_mass * T))
    # T − U with U uniform on [0, T) lands in (0, T]
    times = np.sort(T - rng.uniform(0.0, T, count))
    marks = measure.sample(rng, count)
    logger.debug(f"Path {path_index}: {count} jumps on (0, {T}]")
    return JumpRealization(times, marks, T, measure.total_mass, seed, int(path_index))
