"""End-to-end checks of the truncated schemes and the convergence harness.

Studies at desk scale are marked `slow`; run them with `pytest -m slow`.
"""

import math

import numpy as np
import pytest

from nsdde.experiment import StudyConfig, fit_rate, strong_error_study
from nsdde.experiment.presets import preset_config
from nsdde.jump_scheme import CompensatorOracle, simulate_jump
from nsdde.model import Box, InitialSegment, audit_assumption, make_example_A, make_example_B
from nsdde.model.registry import build_model
from nsdde.noise import MarkMeasure, sample_brownian_batch, sample_jumps
from nsdde.scheme import TimeGrid, simulate, simulate_untruncated
from nsdde.truncation import BoundFunction, TruncationRule, build_rule, truncated_coefficients


def test_truncated_coefficients_stay_below_gauge():
    rng = np.random.default_rng(2024)
    x, y = rng.uniform(-100.0, 100.0, (2, 100_000, 1))
    for model in (make_example_A(0.5), make_example_B()):
        for k in (4, 6, 8):
            rule = build_rule(2.0**-k, 0.25, BoundFunction(model.bound))
            truncated = truncated_coefficients(model, rule)
            magnitude = np.maximum(np.abs(truncated.drift(x, y))[:, 0], np.abs(truncated.diffusion(x, y))[:, 0, 0])
            assert magnitude.max() <= rule.gauge * (1 + 1e-9)


def test_example_b_inequalities_hold():
    registered = build_model("example-b")
    rule = build_rule(2.0**-8, 0.25, BoundFunction(registered.coefficients.bound))
    box = Box.square(-50.0, 50.0)
    for assumption in ("A1", "A3", "A4", "A4'"):
        report = audit_assumption(
            assumption, registered.coefficients, registered.assumptions, box, 10_000, seed=0, radius=rule.radius
        )
        assert report.worst_ratio <= 1 + 1e-9, (assumption, report.witness)
    report = audit_assumption(
        "A4'", registered.coefficients, registered.assumptions, box, 10_000, seed=0, radius=rule.radius
    )
    assert set(report.cases) == {"inside", "outside", "x-outside", "y-outside"}


def test_large_radius_agrees_with_plain_em():
    model = make_example_B()
    grid = TimeGrid(tau=1.0, T=2.0, m=64)
    xi = InitialSegment.constant(1.0, 0.5)
    noise = sample_brownian_batch(0, range(100), 2.0, 1 / 64, 1)
    plain = simulate_untruncated(model, grid, xi, noise)
    radius = 1e6
    assert np.abs(plain.values).max() < radius
    rule = TruncationRule.fixed_radius(1 / 64, radius, BoundFunction(model.bound))
    assert np.array_equal(simulate(model, rule, grid, xi, noise).values, plain.values)


def test_additive_noise_errors_vanish(additive_model):
    config = StudyConfig(levels=[8, 16, 32], m_ref=256, n_paths=100, bootstrap=10)
    report = strong_error_study(config, coefficients=additive_model)
    assert np.all(report.path_errors["at-T"] == 0.0)
    assert [level.error_moment for level in report.levels] == [0.0, 0.0, 0.0]


def test_compensated_jumps_have_zero_mean(identity_jump_model):
    measure = MarkMeasure.parse(2.0, "gauss:1")
    grid = TimeGrid(tau=1.0, T=2.0, m=4)
    rule = build_rule(grid.delta, 0.05, BoundFunction(identity_jump_model.bound), mode="jump", p=3.0)
    oracle = CompensatorOracle.for_rule(identity_jump_model, rule, measure)
    xi = InitialSegment.constant(1.0, 0.5)
    jumps = [sample_jumps(0, i, 2.0, measure) for i in range(10_000)]
    terminal = simulate_jump(identity_jump_model, rule, grid, xi, jumps, oracle).terminal[:, 0]
    std_err = terminal.std(ddof=1) / math.sqrt(terminal.size)
    assert abs(terminal.mean() - 0.5) <= 4 * std_err


class TestRateFitOracle:
    deltas = [2.0**-k for k in range(3, 7)]

    def test_exact_power_law(self):
        fit = fit_rate([(d, 0.7 * d**0.5) for d in self.deltas])
        assert abs(fit.slope - 0.5) <= 1e-12

    def test_bootstrap_coverage(self):
        covered = 0
        for replication in range(100):
            rng = np.random.default_rng(replication)
            path_errors = np.stack([d**0.5 * rng.lognormal(0.0, 0.3, size=400) for d in self.deltas])
            points = [(d, float(np.sqrt(np.mean(row**2)))) for d, row in zip(self.deltas, path_errors)]
            fit = fit_rate(points, path_errors=path_errors, n_boot=500, seed=replication)
            covered += fit.ci_lo <= 0.5 <= fit.ci_hi
        assert covered >= 90


def _assert_decreasing(report):
    errors = [level.root_error for level in report.levels]
    assert all(a > b for a, b in zip(errors, errors[1:])), errors


@pytest.mark.slow
def test_baseline_brownian_rate():
    report = strong_error_study(preset_config("baseline-rate"))
    assert report.fittable and math.isfinite(report.fit.slope)
    assert report.fit.slope >= 0.35
    _assert_decreasing(report)


@pytest.mark.slow
def test_improved_brownian_rate():
    report = strong_error_study(preset_config("improved-rate"))
    # order of the mean-square error, E|err|^2 ~ Δ^(1−ε)
    assert report.theory_moment_order == pytest.approx(0.9)
    assert report.fit.moment_slope >= 0.7
    _assert_decreasing(report)


@pytest.mark.slow
def test_uniform_brownian_rate():
    report = strong_error_study(preset_config("uniform-rate"))
    assert report.fittable and math.isfinite(report.fit.slope)
    assert report.fit.slope >= 0.25
    assert np.all(report.path_errors["uniform"] >= report.path_errors["at-T"])
    _assert_decreasing(report)


@pytest.mark.slow
def test_jump_rate():
    report = strong_error_study(preset_config("jump-rate"))
    assert report.fit.slope >= 0.2
    _assert_decreasing(report)


@pytest.mark.slow
def test_third_moment_independent_of_step():
    report = strong_error_study(preset_config("moment-stability"))
    moments = [moment.moment for moment in report.moments]
    assert [moment.m for moment in report.moments] == [16, 32, 64]
    assert max(moments) < 2 * min(moments)
