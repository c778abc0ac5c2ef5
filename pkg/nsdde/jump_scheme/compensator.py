from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from nsdde.errors import InvalidParameterError, ModeMismatchError
from nsdde.model.coefficients import CoefficientSet
from nsdde.noise.jumps import MarkMeasure
from nsdde.truncation.rule import TruncationRule, truncated_coefficients


CLOSED_FORM = "closed-form"
QUADRATURE = "quadrature"
WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CompensatorOracle:
    """(x, y) ↦ ∫ h_Δ(x, y, u) λ(du), by closed form or fixed quadrature nodes."""

    coefficients: CoefficientSet
    measure: MarkMeasure
    method: str
    radius: float = np.inf
    nodes: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.coefficients.jump is None:
            raise ModeMismatchError(f"model '{self.coefficients.name}' has no jump map h")
        if self.coefficients.mark_dim != self.measure.mark_dim:
            raise InvalidParameterError(
                f"model marks have dimension {self.coefficients.mark_dim}, measure has {self.measure.mark_dim}"
            )
        if self.method == CLOSED_FORM and self.coefficients.jump_compensator is None:
            raise InvalidParameterError(f"model '{self.coefficients.name}' has no closed-form compensator")
        if self.method == QUADRATURE:
            if self.nodes is None or self.weights is None:
                raise InvalidParameterError("quadrature compensator needs nodes and weights")
            total = float(self.weights.sum())
            if np.any(self.weights < 0) or abs(total - self.measure.total_mass) > WEIGHT_TOLERANCE * max(
                self.measure.total_mass, 1.0
            ):
                raise InvalidParameterError(
                    f"quadrature weights must be nonnegative and sum to λ̄={self.measure.total_mass}, got {total}"
                )
        elif self.method != CLOSED_FORM:
            raise InvalidParameterError(f"unknown compensator method '{self.method}'")

    @classmethod
    def for_truncated(
        cls, truncated: CoefficientSet, measure: MarkMeasure, radius: float = np.inf, prefer_closed_form: bool = True
    ) -> "CompensatorOracle":
        if prefer_closed_form and truncated.jump_compensator is not None:
            return cls(truncated, measure, CLOSED_FORM, radius)
        nodes, weights = measure.quadrature()
        return cls(truncated, measure, QUADRATURE, radius, nodes, weights)

    @classmethod
    def for_rule(
        cls, coefficients: CoefficientSet, rule: TruncationRule, measure: MarkMeasure, prefer_closed_form: bool = True
    ) -> "CompensatorOracle":
        return cls.for_truncated(truncated_coefficients(coefficients, rule), measure, rule.radius, prefer_closed_form)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return compensator(self, x, y)


def compensator(oracle: CompensatorOracle, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """∫ h_Δ(x, y, u) λ(du) for a batch of states, shape (P, n)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    coefficients = oracle.coefficients
    if oracle.method == CLOSED_FORM:
        return np.broadcast_to(coefficients.jump_compensator(x, y, oracle.measure), x.shape).astype(float)
    n_paths, n_nodes = x.shape[0], oracle.nodes.shape[0]
    values = coefficients.jump(
        np.repeat(x, n_nodes, axis=0),
        np.repeat(y, n_nodes, axis=0),
        np.tile(oracle.nodes, (n_paths, 1)),
    ).reshape(n_paths, n_nodes, -1)
    return np.einsum("pqn,q->pn", values, oracle.weights)
