"""Coupled Monte Carlo strong-error studies.

The exact solution is proxied by the same truncated scheme at m_ref, driven
by the finest noise; every study level reuses that noise summed to its own
step (and the same jump realization), so level errors measure scheme against
finer scheme under one shared draw of the driver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from nsdde.errors import ModeMismatchError, NotFittableError, NumericalBlowupError
from nsdde.experiment.config import StudyConfig
from nsdde.experiment.rate_fit import RateFit, fit_rate
from nsdde.experiment.runner import path_chunks, run_chunks
from nsdde.jump_scheme.compensator import CompensatorOracle
from nsdde.jump_scheme.stepper import simulate_jump
from nsdde.model.coefficients import AssumptionParams, CoefficientSet, InitialSegment
from nsdde.model.registry.loader import build_model
from nsdde.noise.brownian import sample_brownian_batch
from nsdde.noise.jumps import MarkMeasure, sample_jumps
from nsdde.scheme.grid import TimeGrid
from nsdde.scheme.state import PathRecord
from nsdde.scheme.truncated_em import simulate
from nsdde.truncation.bounds import BoundFunction
from nsdde.truncation.rule import TruncationRule, build_rule


logger = logging.getLogger("ConvergenceStudy")

BASELINE_EPSILON_MAX = 0.25
IMPROVED_EPSILON_MAX = 0.5
MODES = ("at-T", "uniform")


@dataclass(frozen=True)
class LevelResult:
    level: int
    m: int
    delta: float
    g_delta: float
    radius: float
    n_samples: int
    mode: str
    q: float
    error_moment: float
    root_error: float
    std_err: float


@dataclass(frozen=True)
class MomentResult:
    m: int
    delta: float
    g_delta: float
    radius: float
    p: float
    moment: float
    std_err: float


@dataclass(frozen=True)
class ConvergenceReport:
    config: StudyConfig
    levels: List[LevelResult]
    reference: TruncationRule
    fit: Optional[RateFit]
    fit_error: Optional[str]
    theory_moment_order: float
    warnings: List[str] = field(default_factory=list)
    path_errors: Dict[str, np.ndarray] = field(default_factory=dict)
    moments: List[MomentResult] = field(default_factory=list)

    @property
    def fittable(self) -> bool:
        return self.fit is not None


@dataclass
class StudySetup:
    config: StudyConfig
    coefficients: CoefficientSet
    assumptions: AssumptionParams
    xi: InitialSegment
    driver: str
    measure: Optional[MarkMeasure]
    grids: Dict[int, TimeGrid]
    rules: Dict[int, TruncationRule]
    oracles: Dict[int, CompensatorOracle]


@dataclass
class _ChunkErrors:
    at_T: Dict[int, np.ndarray]
    uniform: Dict[int, np.ndarray]
    moments: Dict[int, np.ndarray]


def gauge_exponent(config: StudyConfig) -> float:
    return config.epsilon if config.regime == "baseline" else config.epsilon / 2.0


def theory_moment_order(config: StudyConfig, driver: str) -> float:
    """Exponent of Δ in the theorem bound on the q-th error moment.

    The improved regime assumes the polynomial Lipschitz bound on b and σ,
    which lifts the at-T bound to the Δ^{q/2}·g(Δ)^q shape of the uniform one.
    """
    eps_g, q = gauge_exponent(config), config.q
    if driver == "jump":
        return 0.5 - eps_g * q
    if config.mode == "uniform" or config.regime == "improved":
        return q / 2.0 - eps_g * q
    return q / 4.0 - eps_g * q / 2.0


def prepare_study(
    config: StudyConfig,
    coefficients: Optional[CoefficientSet] = None,
    assumptions: Optional[AssumptionParams] = None,
    xi: Optional[InitialSegment] = None,
) -> StudySetup:
    """Resolve the model and build every grid, rule and compensator; raises before any simulation."""
    if coefficients is None:
        registered = build_model(config.model, config.model_params)
        coefficients = registered.coefficients
        assumptions = assumptions or registered.assumptions
    assumptions = assumptions or AssumptionParams()
    assumptions = replace(assumptions, q=config.q, **({"p": config.p} if config.p is not None else {}))

    driver = config.driver or coefficients.driver
    if driver != coefficients.driver:
        raise ModeMismatchError(f"driver '{driver}' requested for the {coefficients.driver}-driven model '{coefficients.name}'")
    measure = MarkMeasure.parse(config.intensity, config.mark_dist) if driver == "jump" else None
    if xi is None:
        xi = InitialSegment.constant(config.tau, [config.xi] * coefficients.state_dim)

    bound = BoundFunction.for_model(coefficients, measure)
    grids, rules, oracles = {}, {}, {}
    for m in sorted({*config.levels, config.m_ref}):
        grid = TimeGrid(config.tau, config.T, m)
        rule = build_rule(grid.delta, config.epsilon, bound, mode=driver, p=assumptions.p, regime=config.regime)
        grids[m], rules[m] = grid, rule
        if measure is not None:
            oracles[m] = CompensatorOracle.for_rule(coefficients, rule, measure)
        logger.info(f"Level m={m}: Δ={grid.delta:.6g}, g(Δ)={rule.gauge:.6g}, r={rule.radius:.6g}")

    return StudySetup(config, coefficients, assumptions, xi, driver, measure, grids, rules, oracles)


def precondition_warnings(setup: StudySetup) -> List[str]:
    config = setup.config
    problems = list(setup.assumptions.rate_precondition_warnings())
    if setup.driver == "brownian":
        limit = BASELINE_EPSILON_MAX if config.regime == "baseline" else IMPROVED_EPSILON_MAX
        if config.epsilon > limit:
            problems.append(f"ε={config.epsilon} is outside (0, {limit}] for the {config.regime} rate")
    xi_norm = setup.xi.sup_norm(config.m_ref)
    clipped = [m for m, rule in sorted(setup.rules.items()) if rule.radius <= xi_norm]
    if clipped:
        problems.append(
            f"‖ξ‖∞={xi_norm:.4g} is not below the truncation radius at m={clipped}; "
            f"errors include the change of radius between levels"
        )
    return problems


def _run_level(run: Callable[[int], PathRecord], m: int) -> PathRecord:
    try:
        return run(m)
    except NumericalBlowupError as e:
        raise e.at_level(m) from e


def _simulate_chunk(setup: StudySetup, indices: np.ndarray) -> _ChunkErrors:
    config = setup.config
    if setup.driver == "brownian":
        noise = sample_brownian_batch(
            config.seed, indices, config.T, config.tau / config.m_ref, setup.coefficients.noise_dim
        )

        def run(m: int) -> PathRecord:
            return simulate(setup.coefficients, setup.rules[m], setup.grids[m], setup.xi, noise)

    else:
        jumps = [sample_jumps(config.seed, int(i), config.T, setup.measure) for i in indices]

        def run(m: int) -> PathRecord:
            return simulate_jump(setup.coefficients, setup.rules[m], setup.grids[m], setup.xi, jumps, setup.oracles[m])

    reference = _run_level(run, config.m_ref)
    errors = _ChunkErrors({}, {}, {})
    for m in config.levels:
        record = reference if m == config.m_ref else _run_level(run, m)
        factor = config.m_ref // m
        # reference values at the level's grid times t_0..t_M
        shared = reference.values[:, config.m_ref :: factor]
        gaps = np.linalg.norm(shared - record.values[:, m:], axis=-1)
        errors.at_T[m] = gaps[:, -1]
        errors.uniform[m] = gaps.max(axis=1)
        errors.moments[m] = np.linalg.norm(record.terminal, axis=-1) ** config.moment_p
    return errors


def _std_err(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    return float(np.std(samples, ddof=1) / math.sqrt(samples.size))


def strong_error_study(
    config: StudyConfig,
    coefficients: Optional[CoefficientSet] = None,
    assumptions: Optional[AssumptionParams] = None,
    xi: Optional[InitialSegment] = None,
) -> ConvergenceReport:
    """Estimate per-level strong errors against the m_ref reference and fit the convergence order."""
    setup = prepare_study(config, coefficients, assumptions, xi)
    warnings = precondition_warnings(setup)
    for message in warnings:
        logger.warning(message)

    levels = config.sorted_levels
    logger.info(
        f"Starting {setup.driver} study of '{setup.coefficients.name}': levels {levels}, m_ref={config.m_ref}, "
        f"N={config.n_paths}, mode={config.mode}, q={config.q}"
    )
    chunks = run_chunks(lambda indices: _simulate_chunk(setup, indices), path_chunks(config.n_paths))

    # chunks are in ascending path order, so every reduction below is schedule independent
    at_T = np.stack([np.concatenate([c.at_T[m] for c in chunks]) for m in levels])
    uniform = np.stack([np.concatenate([c.uniform[m] for c in chunks]) for m in levels])
    terminal = np.stack([np.concatenate([c.moments[m] for c in chunks]) for m in levels])
    selected = at_T if config.mode == "at-T" else uniform

    results, moments = [], []
    for j, m in enumerate(levels):
        rule = setup.rules[m]
        powered = selected[j] ** config.q
        moment = float(np.mean(powered))
        results.append(
            LevelResult(
                level=j,
                m=m,
                delta=rule.delta,
                g_delta=rule.gauge,
                radius=rule.radius,
                n_samples=config.n_paths,
                mode=config.mode,
                q=config.q,
                error_moment=moment,
                root_error=moment ** (1.0 / config.q),
                std_err=_std_err(powered),
            )
        )
        moments.append(
            MomentResult(
                m=m,
                delta=rule.delta,
                g_delta=rule.gauge,
                radius=rule.radius,
                p=config.moment_p,
                moment=float(np.mean(terminal[j])),
                std_err=_std_err(terminal[j]),
            )
        )
        logger.info(f"Level m={m}: root error {results[-1].root_error:.6g} (±{results[-1].std_err:.3g} on the moment)")

    fit, fit_error = None, None
    try:
        fit = fit_rate(
            [(r.delta, r.root_error) for r in results],
            path_errors=selected,
            q=config.q,
            n_boot=config.bootstrap,
            seed=config.seed,
        )
        logger.info(
            f"Fitted slope {fit.slope:.4f} (95% CI {fit.ci_lo}, {fit.ci_hi}), R²={fit.r2:.4f}; "
            f"moment slope {fit.moment_slope:.4f} against theory {theory_moment_order(config, setup.driver):.4f}"
        )
    except NotFittableError as e:
        fit_error = str(e)
        logger.warning(f"Rate not fittable: {e}")

    return ConvergenceReport(
        config=config,
        levels=results,
        reference=setup.rules[config.m_ref],
        fit=fit,
        fit_error=fit_error,
        theory_moment_order=theory_moment_order(config, setup.driver),
        warnings=warnings,
        path_errors={"at-T": at_T, "uniform": uniform},
        moments=moments,
    )
