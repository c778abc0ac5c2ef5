"""Numerical audit of the coefficient assumptions on compact boxes.

Every inequality lhs ≤ rhs is evaluated on a scrambled Halton lattice plus
the box corners and the origin. The reported ratio is lhs/rhs (0 when both
vanish, +inf when only rhs does); an assumption passes when its worst ratio
is at most 1 + 1e-9. A pass is evidence on the box, never a proof.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from nsdde.errors import InapplicableAssumptionError, InvalidParameterError, UnsupportedAssumptionError
from nsdde.model.coefficients import AssumptionParams, CoefficientSet
from nsdde.noise.jumps import MarkMeasure
from nsdde.noise.streams import AUDIT_STREAM, stream_generator
from nsdde.truncation.projection import truncate_point


logger = logging.getLogger("AssumptionAudit")

PASS_TOLERANCE = 1e-9
MAX_CORNER_DIMS = 12
OUTSIDE_MARGIN = 1e-9

ASSUMPTIONS = ("A1", "A2", "A3", "A4", "A4'", "A5", "A6", "A7", "A8", "B1", "B2")
TWO_PAIR = frozenset({"A2", "A5", "A7", "A8", "B1"})
TRUNCATED = frozenset({"A4", "A4'", "B2"})
NEEDS_DIFFUSION = frozenset({"A3", "A4", "A5", "A7", "A8"})
NEEDS_JUMP = frozenset({"B1"})
CASES = ("inside", "outside", "x-outside", "y-outside")
CONSTANTS = {
    "A3": "L1",
    "A4": "L1_bar",
    "A4'": "L1_bar",
    "A5": "L2",
    "A6": "L3",
    "A7": "L4",
    "A8": "L",
    "B1": "K1",
    "B2": "K2",
}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box for the pair (x, y) ∈ R^n × R^n."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower, upper = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size % 2:
            raise InvalidParameterError("box bounds must be two vectors of equal even length 2n")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)) and np.all(lower < upper)):
            raise InvalidParameterError(f"box bounds must be finite with lower < upper, got {lower} .. {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def square(cls, lo: float, hi: float, state_dim: int = 1) -> "Box":
        return cls(np.full(2 * state_dim, float(lo)), np.full(2 * state_dim, float(hi)))

    @property
    def state_dim(self) -> int:
        return self.lower.size // 2


@dataclass(frozen=True)
class AuditReport:
    """Worst ratio of one assumption over the audit lattice.

    `n_samples` is the lattice size the caller asked for; `n_evaluations`
    counts inequality evaluations over every component and case.
    """

    assumption: str
    n_samples: int
    worst_ratio: float
    witness: Dict[str, object]
    passed: bool
    components: Dict[str, float] = field(default_factory=dict)
    cases: Dict[str, float] = field(default_factory=dict)
    n_evaluations: int = 0


@dataclass
class _Component:
    name: str
    ratio: np.ndarray
    inputs: Dict[str, np.ndarray]
    case: Optional[str] = None

    def worst(self) -> Tuple[float, int]:
        index = int(np.argmax(self.ratio))
        return float(self.ratio[index]), index


def _ratio(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
    fallback = np.where(lhs > 0, np.inf, 0.0)
    return np.divide(lhs, rhs, out=fallback, where=rhs > 0)


def _norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def _matrix_norm(s: np.ndarray) -> np.ndarray:
    return np.linalg.norm(s, axis=(-2, -1))


def _inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("pi,pi->p", u, v)


def sample_points(lower: np.ndarray, upper: np.ndarray, n_samples: int, seed: int) -> np.ndarray:
    """Scrambled Halton lattice scaled to the box, then corners and the origin."""
    dim = lower.size
    engine = qmc.Halton(d=dim, scramble=True, seed=stream_generator(seed, 0, AUDIT_STREAM))
    parts = [qmc.scale(engine.random(n_samples), lower, upper)]
    if dim <= MAX_CORNER_DIMS:
        parts.append(np.array(list(itertools.product(*zip(lower, upper)))))
    else:
        logger.info(f"Skipping the 2^{dim} box corners; only the lattice and the origin are sampled")
    parts.append(np.clip(np.zeros((1, dim)), lower, upper))
    return np.vstack(parts)


def _radial(v: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Map each row to the same direction with norm spread over [lo, hi]."""
    norm = _norm(v)[:, np.newaxis]
    peak = float(norm.max()) if norm.size else 0.0
    unit = np.zeros_like(v)
    unit[:, 0] = 1.0
    direction = np.where(norm > 0, v / np.where(norm > 0, norm, 1.0), unit)
    scale = norm / peak if peak > 0 else np.zeros_like(norm)
    return direction * (lo + (hi - lo) * scale)


def _case_points(x: np.ndarray, y: np.ndarray, radius: float) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """The four placements of (x, y) relative to the truncation ball."""
    far = max(float(np.max(_norm(x))), float(np.max(_norm(y))), 2.0 * radius)
    near = radius * (1.0 + OUTSIDE_MARGIN)
    inside_x, inside_y = _radial(x, 0.0, radius), _radial(y, 0.0, radius)
    outside_x, outside_y = _radial(x, near, far), _radial(y, near, far)
    return {
        "inside": (inside_x, inside_y),
        "outside": (outside_x, outside_y),
        "x-outside": (outside_x, inside_y),
        "y-outside": (inside_x, outside_y),
    }


class _Auditor:
    def __init__(self, coefficients: CoefficientSet, params: AssumptionParams) -> None:
        self.c = coefficients
        self.params = params

    # single-pair inequalities

    def a1(self, x: np.ndarray, y: np.ndarray) -> List[_Component]:
        D = self.c.neutral
        lhs = _norm(D(x) - D(y))
        rhs = self.c.kappa * _norm(x - y)
        return [_Component("contraction", _ratio(lhs, rhs), {"x": x, "y": y})]

    def _khasminskii(self, x, y, px, py, constant: float, with_sigma: bool, name: str) -> _Component:
        lhs = _inner(x - self.c.neutral(y), self.c.drift(px, py))
        if with_sigma:
            lhs = lhs + 0.5 * (self.params.p - 1.0) * _matrix_norm(self.c.diffusion(px, py)) ** 2
        rhs = constant * (1.0 + _norm(x) ** 2 + _norm(y) ** 2)
        return _Component(name, _ratio(lhs, rhs), {"x": x, "y": y})

    def a3(self, x, y) -> List[_Component]:
        return [self._khasminskii(x, y, x, y, self.params.require("L1"), True, "khasminskii")]

    def a6(self, x, y) -> List[_Component]:
        l = self.params.l
        lhs = _norm(self.c.drift(x, y))
        rhs = self.params.require("L3") * (1.0 + _norm(x) ** l + _norm(y) ** l)
        return [_Component("polynomial-growth", _ratio(lhs, rhs), {"x": x, "y": y})]

    def truncated(self, assumption: str, x, y, radius: float) -> List[_Component]:
        constant = self.params.require("K2" if assumption == "B2" else "L1_bar")
        with_sigma = assumption == "A4"
        components = []
        for case, (cx, cy) in _case_points(x, y, radius).items():
            px, py = truncate_point(cx, radius), truncate_point(cy, radius)
            component = self._khasminskii(cx, cy, px, py, constant, with_sigma, f"truncated-{case}")
            component.case = case
            components.append(component)
        return components

    # two-pair inequalities

    def _differences(self, x, y, xb, yb):
        dx, dy = _norm(x - xb), _norm(y - yb)
        db = self.c.drift(x, y) - self.c.drift(xb, yb)
        return dx, dy, db

    def _pairs(self, x, y, xb, yb) -> Dict[str, np.ndarray]:
        return {"x": x, "y": y, "x_bar": xb, "y_bar": yb}

    def _poly_weight(self, x, y, xb, yb) -> np.ndarray:
        l = self.params.l
        return 1.0 + _norm(x) ** l + _norm(xb) ** l + _norm(y) ** l + _norm(yb) ** l

    def _one_sided(self, x, y, xb, yb, db) -> np.ndarray:
        D = self.c.neutral
        return _inner(x - D(y) - xb + D(yb), db)

    def a2(self, x, y, xb, yb) -> List[_Component]:
        lipschitz = self.params.local_lipschitz
        if lipschitz is None:
            raise InvalidParameterError("local Lipschitz map L_R is not declared")
        dx, dy, db = self._differences(x, y, xb, yb)
        lhs = _norm(db)
        if self.c.diffusion is not None:
            lhs = np.maximum(lhs, _matrix_norm(self.c.diffusion(x, y) - self.c.diffusion(xb, yb)))
        radii = np.max(np.stack([_norm(x), _norm(y), _norm(xb), _norm(yb)]), axis=0)
        rhs = np.array([lipschitz(float(r)) for r in radii]) * (dx + dy)
        return [_Component("local-lipschitz", _ratio(lhs, rhs), self._pairs(x, y, xb, yb))]

    def a5(self, x, y, xb, yb) -> List[_Component]:
        dx, dy, db = self._differences(x, y, xb, yb)
        ds = _matrix_norm(self.c.diffusion(x, y) - self.c.diffusion(xb, yb))
        lhs = self._one_sided(x, y, xb, yb, db) + 0.5 * (self.params.q - 1.0) * ds**2
        rhs = self.params.require("L2") * (dx**2 + dy**2)
        return [_Component("one-sided-lipschitz", _ratio(lhs, rhs), self._pairs(x, y, xb, yb))]

    def a7(self, x, y, xb, yb) -> List[_Component]:
        dx, dy, db = self._differences(x, y, xb, yb)
        ds = _matrix_norm(self.c.diffusion(x, y) - self.c.diffusion(xb, yb))
        rhs = self.params.require("L4") * self._poly_weight(x, y, xb, yb) * (dx + dy)
        return [_Component("polynomial-lipschitz", _ratio(_norm(db) + ds, rhs), self._pairs(x, y, xb, yb))]

    def a8(self, x, y, xb, yb) -> List[_Component]:
        constant = self.params.require("L")
        dx, dy, db = self._differences(x, y, xb, yb)
        ds = _matrix_norm(self.c.diffusion(x, y) - self.c.diffusion(xb, yb))
        pairs = self._pairs(x, y, xb, yb)
        one_sided = np.maximum(self._one_sided(x, y, xb, yb, db), ds**2)
        return [
            _Component("one-sided-lipschitz", _ratio(one_sided, constant * (dx**2 + dy**2)), pairs),
            _Component(
                "polynomial-lipschitz",
                _ratio(_norm(db), constant * self._poly_weight(x, y, xb, yb) * (dx + dy)),
                pairs,
            ),
        ]

    def b1(self, x, y, xb, yb, measure: MarkMeasure) -> List[_Component]:
        constant = self.params.require("K1")
        p = self.params.p
        n = self.c.state_dim
        dx, dy, db = self._differences(x, y, xb, yb)
        pairs = self._pairs(x, y, xb, yb)
        nodes, weights = measure.quadrature()

        zeros = np.zeros((nodes.shape[0], n))
        at_origin = _norm(self.c.jump(zeros, zeros, nodes))
        origin = _Component("jump-at-origin", _ratio(at_origin, _norm(nodes) ** p), {"u": nodes})

        n_pts, n_nodes = x.shape[0], nodes.shape[0]
        rep = lambda v: np.repeat(v, n_nodes, axis=0)  # noqa: E731
        marks = np.tile(nodes, (n_pts, 1))
        dh = _norm(self.c.jump(rep(x), rep(y), marks) - self.c.jump(rep(xb), rep(yb), marks)).reshape(n_pts, n_nodes)
        integral = (dh**p) @ weights

        return [
            origin,
            _Component("one-sided-lipschitz", _ratio(self._one_sided(x, y, xb, yb, db), constant * (dx**2 + dy**2)), pairs),
            _Component("jump-lipschitz", _ratio(integral, constant * (dx**p + dy**p)), pairs),
            _Component(
                "polynomial-lipschitz",
                _ratio(_norm(db), constant * self._poly_weight(x, y, xb, yb) * (dx + dy)),
                pairs,
            ),
        ]


def _check_applicable(assumption: str, coefficients: CoefficientSet) -> None:
    if assumption not in ASSUMPTIONS:
        raise UnsupportedAssumptionError(f"unknown assumption '{assumption}' (supported: {', '.join(ASSUMPTIONS)})")
    if assumption in NEEDS_DIFFUSION and coefficients.diffusion is None:
        raise InapplicableAssumptionError(f"{assumption} constrains σ, but model '{coefficients.name}' has no diffusion")
    if assumption in NEEDS_JUMP and coefficients.jump is None:
        raise InapplicableAssumptionError(f"{assumption} constrains h, but model '{coefficients.name}' has no jump map")


def declared_assumptions(coefficients: CoefficientSet, params: AssumptionParams, with_radius: bool) -> List[str]:
    """Assumptions that apply to the model and whose constants it declares."""
    selected = []
    for assumption in ASSUMPTIONS:
        try:
            _check_applicable(assumption, coefficients)
        except InapplicableAssumptionError:
            continue
        if assumption in TRUNCATED and not with_radius:
            continue
        if assumption == "A2" and params.local_lipschitz is None:
            continue
        constant = CONSTANTS.get(assumption)
        if constant is not None and getattr(params, constant) is None:
            continue
        selected.append(assumption)
    return selected


def audit_assumption(
    assumption: str,
    coefficients: CoefficientSet,
    params: AssumptionParams,
    box: Box,
    n_samples: int,
    seed: int,
    radius: Optional[float] = None,
    measure: Optional[MarkMeasure] = None,
) -> AuditReport:
    """Evaluate one assumption on the box and report its worst ratio and witness."""
    _check_applicable(assumption, coefficients)
    if n_samples < 1:
        raise InvalidParameterError(f"n_samples must be >= 1, got {n_samples}")
    n = coefficients.state_dim
    if box.state_dim != n:
        raise InvalidParameterError(f"box is for n={box.state_dim}, model has n={n}")
    if assumption in TRUNCATED and not (radius is not None and radius > 0):
        raise InvalidParameterError(f"{assumption} needs a positive truncation radius, got {radius}")
    if assumption == "B1" and measure is None:
        raise InvalidParameterError("B1 needs the mark measure for its jump integral")

    auditor = _Auditor(coefficients, params)
    if assumption in TWO_PAIR:
        points = sample_points(np.tile(box.lower, 2), np.tile(box.upper, 2), n_samples, seed)
        x, y, xb, yb = (points[:, i * n : (i + 1) * n] for i in range(4))
        handlers: Dict[str, Callable[[], List[_Component]]] = {
            "A2": lambda: auditor.a2(x, y, xb, yb),
            "A5": lambda: auditor.a5(x, y, xb, yb),
            "A7": lambda: auditor.a7(x, y, xb, yb),
            "A8": lambda: auditor.a8(x, y, xb, yb),
            "B1": lambda: auditor.b1(x, y, xb, yb, measure),
        }
    else:
        points = sample_points(box.lower, box.upper, n_samples, seed)
        x, y = points[:, :n], points[:, n:]
        handlers = {
            "A1": lambda: auditor.a1(x, y),
            "A3": lambda: auditor.a3(x, y),
            "A6": lambda: auditor.a6(x, y),
            "A4": lambda: auditor.truncated("A4", x, y, radius),
            "A4'": lambda: auditor.truncated("A4'", x, y, radius),
            "B2": lambda: auditor.truncated("B2", x, y, radius),
        }

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        components = handlers[assumption]()
    return _report(assumption, components, n_samples)


def _report(assumption: str, components: List[_Component], n_samples: int) -> AuditReport:
    worst_ratio, worst_component, worst_index = -math.inf, components[0], 0
    summary: Dict[str, float] = {}
    cases: Dict[str, float] = {}
    for component in components:
        ratio, index = component.worst()
        if component.case is not None:
            cases[component.case] = ratio
        else:
            summary[component.name] = max(ratio, summary.get(component.name, -math.inf))
        if ratio > worst_ratio:
            worst_ratio, worst_component, worst_index = ratio, component, index

    witness: Dict[str, object] = {k: v[worst_index].tolist() for k, v in worst_component.inputs.items()}
    witness["component"] = worst_component.name
    if worst_component.case is not None:
        witness["case"] = worst_component.case
    passed = bool(worst_ratio <= 1.0 + PASS_TOLERANCE)
    n_evaluated = int(sum(c.ratio.size for c in components))
    logger.info(f"{assumption}: worst ratio {worst_ratio:.6g} over {n_evaluated} evaluations ({'pass' if passed else 'fail'})")
    return AuditReport(
        assumption=assumption,
        n_samples=n_samples,
        worst_ratio=worst_ratio,
        witness=witness,
        passed=passed,
        components=summary,
        cases=cases,
        n_evaluations=n_evaluated,
    )


def estimate_contraction(coefficients: CoefficientSet, box: Box, n_samples: int, seed: int) -> Tuple[float, Dict[str, object]]:
    """Empirical sup of |D(x) − D(y)|/|x − y| over the box; an estimate of κ, not a certificate."""
    n = coefficients.state_dim
    points = sample_points(box.lower, box.upper, n_samples, seed)
    x, y = points[:, :n], points[:, n:]
    gap = _norm(x - y)
    keep = gap > 0
    if not keep.any():
        return 0.0, {}
    ratios = _norm(coefficients.neutral(x[keep]) - coefficients.neutral(y[keep])) / gap[keep]
    index = int(np.argmax(ratios))
    return float(ratios[index]), {"x": x[keep][index].tolist(), "y": y[keep][index].tolist()}
