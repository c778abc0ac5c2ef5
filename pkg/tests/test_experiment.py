"""Strong-error studies, rate fitting and the path-chunk runner."""

import numpy as np
import pytest
from pydantic import ValidationError

from nsdde.errors import InvalidParameterError, ModeMismatchError, NotFittableError
from nsdde.experiment import StudyConfig, fit_rate, prepare_study, strong_error_study, theory_moment_order
from nsdde.experiment.presets.loader import list_presets, preset_config
from nsdde.experiment.runner import path_chunks, run_chunks


SMALL = dict(model="example-b", T=1.0, levels=[4, 8], m_ref=16, n_paths=20, bootstrap=50)


class TestStudyConfig:
    def test_defaults(self):
        config = StudyConfig()
        assert config.levels == [8, 16, 32, 64]
        assert config.m_ref == 512
        assert config.sorted_levels == [8, 16, 32, 64]

    @pytest.mark.parametrize(
        "fields",
        [
            {"levels": [8, 24], "m_ref": 64},
            {"levels": [8, 8]},
            {"levels": []},
            {"T": 1.1, "levels": [4], "m_ref": 8},
            {"tau": 4.0, "T": 4.0, "levels": [2], "m_ref": 4},
            {"epsilon": 0.0},
            {"q": 1.5},
            {"mark_dist": "cauchy:1"},
            {"regime": "fast"},
            {"unknown": 1},
        ],
    )
    def test_rejected(self, fields):
        with pytest.raises((ValidationError, InvalidParameterError)):
            StudyConfig(**fields)

    def test_frozen(self):
        with pytest.raises(ValidationError):
            StudyConfig().epsilon = 0.1


class TestFitRate:
    deltas = [2.0**-k for k in range(3, 7)]

    def test_exact_power_law(self):
        fit = fit_rate([(d, 3.0 * d**0.5) for d in self.deltas])
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.ci_lo is None

    def test_two_points(self):
        fit = fit_rate([(0.5, 0.2), (0.25, 0.1)])
        assert fit.slope == pytest.approx(1.0)

    def test_too_few_or_zero_errors(self):
        with pytest.raises(NotFittableError):
            fit_rate([(0.5, 0.2)])
        with pytest.raises(NotFittableError):
            fit_rate([(0.5, 0.2), (0.25, 0.0)])

    def test_duplicate_steps(self):
        with pytest.raises(InvalidParameterError):
            fit_rate([(0.5, 0.2), (0.5, 0.1)])

    def test_bootstrap_interval_brackets_slope(self):
        rng = np.random.default_rng(0)
        path_errors = np.stack([d**0.5 * rng.lognormal(0.0, 0.3, size=400) for d in self.deltas])
        points = [(d, float(np.sqrt(np.mean(row**2)))) for d, row in zip(self.deltas, path_errors)]
        fit = fit_rate(points, path_errors=path_errors, n_boot=200, seed=1)
        assert fit.slope == pytest.approx(0.5, abs=0.1)
        assert fit.ci_lo < fit.slope < fit.ci_hi
        again = fit_rate(points, path_errors=path_errors, n_boot=200, seed=1)
        assert (again.ci_lo, again.ci_hi) == (fit.ci_lo, fit.ci_hi)

    def test_moment_slope_scales_with_q(self):
        fit = fit_rate([(d, 3.0 * d**0.5) for d in self.deltas], q=3.0)
        assert fit.moment_slope == pytest.approx(1.5, abs=1e-12)
        assert fit.moment_ci == (None, None)
        rng = np.random.default_rng(4)
        path_errors = np.stack([d**0.5 * rng.lognormal(0.0, 0.3, size=200) for d in self.deltas])
        points = [(d, float(np.sqrt(np.mean(row**2)))) for d, row in zip(self.deltas, path_errors)]
        fit = fit_rate(points, path_errors=path_errors, n_boot=100, seed=2)
        assert fit.moment_ci == (2 * fit.ci_lo, 2 * fit.ci_hi)

    def test_exponent_must_be_positive(self):
        with pytest.raises(InvalidParameterError):
            fit_rate([(0.5, 0.2), (0.25, 0.1)], q=0.0)

    def test_path_errors_must_match_levels(self):
        with pytest.raises(InvalidParameterError):
            fit_rate([(0.5, 0.2), (0.25, 0.1)], path_errors=np.ones((3, 10)))


class TestTheoryOrder:
    def test_orders(self):
        config = StudyConfig(epsilon=0.05)
        assert theory_moment_order(config, "brownian") == pytest.approx(0.45)
        assert theory_moment_order(config.model_copy(update={"mode": "uniform"}), "brownian") == pytest.approx(0.9)
        assert theory_moment_order(config, "jump") == pytest.approx(0.4)
        improved = StudyConfig(epsilon=0.1, regime="improved")
        assert theory_moment_order(improved, "brownian") == pytest.approx(0.9)
        assert theory_moment_order(improved.model_copy(update={"mode": "uniform"}), "brownian") == pytest.approx(0.9)


class TestRunner:
    def test_path_chunks(self):
        chunks = path_chunks(10, 4)
        assert [c.tolist() for c in chunks] == [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]]

    def test_run_chunks_keeps_order(self):
        chunks = path_chunks(50, 3)
        assert run_chunks(lambda c: int(c[0]), chunks, workers=4) == [int(c[0]) for c in chunks]
        assert run_chunks(lambda c: int(c[0]), chunks, workers=1) == [int(c[0]) for c in chunks]


class TestStrongErrorStudy:
    def test_additive_noise_is_exact_on_every_level(self, additive_model):
        config = StudyConfig(**SMALL, mode="uniform")
        report = strong_error_study(config, coefficients=additive_model)
        assert [level.root_error for level in report.levels] == [0.0, 0.0]
        assert report.fit is None
        assert "root errors must be positive" in report.fit_error
        assert not report.fittable

    def test_report_rows(self):
        report = strong_error_study(StudyConfig(**SMALL))
        assert [level.m for level in report.levels] == [4, 8]
        assert [level.level for level in report.levels] == [0, 1]
        first = report.levels[0]
        assert first.delta == 0.25 and first.n_samples == 20 and first.mode == "at-T"
        assert first.root_error == pytest.approx(first.error_moment**0.5)
        assert first.g_delta == pytest.approx(0.25**-0.05)
        assert report.reference.delta == 1 / 16
        assert report.path_errors["at-T"].shape == (2, 20)
        assert [moment.p for moment in report.moments] == [3.0, 3.0]
        assert report.theory_moment_order == pytest.approx(0.45)

    def test_deterministic(self):
        first = strong_error_study(StudyConfig(**SMALL))
        second = strong_error_study(StudyConfig(**SMALL))
        assert first.levels == second.levels
        assert first.fit == second.fit

    def test_independent_of_threads_and_chunking(self, monkeypatch):
        monkeypatch.setenv("NSDDE_THREADS", "1")
        monkeypatch.setenv("NSDDE_CHUNK_PATHS", "20")
        serial = strong_error_study(StudyConfig(**SMALL))
        monkeypatch.setenv("NSDDE_THREADS", "4")
        monkeypatch.setenv("NSDDE_CHUNK_PATHS", "3")
        parallel = strong_error_study(StudyConfig(**SMALL))
        assert serial.levels == parallel.levels
        assert serial.moments == parallel.moments
        assert serial.fit == parallel.fit

    def test_seed_changes_errors(self):
        first = strong_error_study(StudyConfig(**SMALL))
        other = strong_error_study(StudyConfig(**SMALL, seed=1))
        assert first.levels[0].root_error != other.levels[0].root_error

    def test_jump_study(self):
        config = StudyConfig(
            model="example-jump", driver="jump", T=1.0, levels=[4, 8], m_ref=16, n_paths=20, bootstrap=50, epsilon=0.08
        )
        report = strong_error_study(config)
        assert report.theory_moment_order == pytest.approx(0.34)
        assert all(np.isfinite(level.root_error) for level in report.levels)

    def test_driver_must_match_model(self):
        with pytest.raises(ModeMismatchError):
            prepare_study(StudyConfig(**SMALL, driver="jump"))

    def test_rate_precondition_warning(self):
        report = strong_error_study(StudyConfig(**SMALL))
        assert any("q·l < 2p fails" in message for message in report.warnings)

    def test_initial_segment_outside_radius_warning(self):
        report = strong_error_study(StudyConfig(**SMALL))
        assert any("not below the truncation radius at m=[4, 8, 16]" in message for message in report.warnings)
        inside = strong_error_study(StudyConfig(**SMALL, xi=0.01))
        assert not any("truncation radius" in message for message in inside.warnings)

    def test_improved_gauge_equals_baseline_at_half_epsilon(self):
        baseline = strong_error_study(StudyConfig(**SMALL, epsilon=0.05))
        improved = strong_error_study(StudyConfig(**SMALL, epsilon=0.1, regime="improved"))
        assert improved.levels == baseline.levels
        assert improved.fit.slope == baseline.fit.slope
        assert baseline.theory_moment_order == pytest.approx(0.45)
        assert improved.theory_moment_order == pytest.approx(0.9)

    def test_level_order_does_not_matter(self):
        ascending = strong_error_study(StudyConfig(**SMALL))
        descending = strong_error_study(StudyConfig(**{**SMALL, "levels": [8, 4]}))
        assert descending.levels == ascending.levels
        for mode in ("at-T", "uniform"):
            assert np.array_equal(descending.path_errors[mode], ascending.path_errors[mode])

    def test_uniform_error_dominates_terminal_error(self):
        report = strong_error_study(StudyConfig(**SMALL, mode="uniform"))
        assert np.all(report.path_errors["uniform"] >= report.path_errors["at-T"])
        assert np.all(report.path_errors["at-T"] >= 0.0)

    def test_reference_level_has_zero_error(self):
        report = strong_error_study(StudyConfig(**{**SMALL, "levels": [16, 4]}))
        assert [level.m for level in report.levels] == [4, 16]
        assert np.all(report.path_errors["at-T"][1] == 0.0)
        assert np.all(report.path_errors["uniform"][1] == 0.0)
        assert report.levels[1].error_moment == 0.0
        assert report.levels[0].error_moment > 0.0
        assert report.fit is None and "root errors must be positive" in report.fit_error


class TestPresets:
    def test_listed(self):
        assert list_presets() == ["baseline-rate", "improved-rate", "jump-rate", "moment-stability", "uniform-rate"]

    def test_overrides_win(self):
        config = preset_config("jump-rate", {"n_paths": 10, "seed": None})
        assert config.driver == "jump"
        assert config.n_paths == 10
        assert config.seed == 0

    def test_unknown(self):
        with pytest.raises(InvalidParameterError):
            preset_config("nope")

    @pytest.mark.parametrize("name", ["baseline-rate", "improved-rate", "jump-rate", "moment-stability", "uniform-rate"])
    def test_presets_prepare(self, name):
        setup = prepare_study(preset_config(name))
        assert set(setup.rules) == {*setup.config.levels, setup.config.m_ref}
