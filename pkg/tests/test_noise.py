import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdde.errors import GridMismatchError, InvalidIntensityError, InvalidParameterError
from nsdde.noise import (
    BrownianGrid,
    MarkDistribution,
    MarkMeasure,
    coarsen,
    sample_brownian,
    sample_brownian_batch,
    sample_jumps,
    steps_for,
    stream_generator,
)
from nsdde.noise.brownian import snap_to_lattice
from nsdde.noise.streams import BROWNIAN_STREAM, JUMP_STREAM, SEED_LIMIT


def _grid(increments):
    increments = np.asarray(increments, dtype=float).reshape(1, -1, 1)
    return BrownianGrid(increments, 0.25, 0.25, 0.25 * increments.shape[1], 0, np.array([0]))


class TestStreams:
    def test_streams_are_independent_of_order(self):
        first = stream_generator(7, 3, BROWNIAN_STREAM).standard_normal(4)
        stream_generator(7, 4, BROWNIAN_STREAM).standard_normal(100)
        again = stream_generator(7, 3, BROWNIAN_STREAM).standard_normal(4)
        assert np.array_equal(first, again)

    def test_streams_differ_by_key(self):
        a = stream_generator(7, 3, BROWNIAN_STREAM).standard_normal(4)
        assert not np.array_equal(a, stream_generator(7, 3, JUMP_STREAM).standard_normal(4))
        assert not np.array_equal(a, stream_generator(7, 4, BROWNIAN_STREAM).standard_normal(4))
        assert not np.array_equal(a, stream_generator(8, 3, BROWNIAN_STREAM).standard_normal(4))

    @pytest.mark.parametrize("seed", [-1, SEED_LIMIT])
    def test_seed_range(self, seed):
        with pytest.raises(InvalidParameterError):
            stream_generator(seed, 0, BROWNIAN_STREAM)

    def test_negative_path_index(self):
        with pytest.raises(InvalidParameterError):
            stream_generator(0, -1, BROWNIAN_STREAM)


class TestBrownian:
    def test_deterministic(self):
        a = sample_brownian(42, 5, 2.0, 1 / 64, 1)
        b = sample_brownian(42, 5, 2.0, 1 / 64, 1)
        assert np.array_equal(a.increments, b.increments)
        assert a.increments.shape == (1, 128, 1)

    def test_batch_rows_match_single_paths(self):
        batch = sample_brownian_batch(3, [0, 4, 9], 1.0, 1 / 32, 2)
        for row, index in enumerate([0, 4, 9]):
            single = sample_brownian(3, index, 1.0, 1 / 32, 2)
            assert np.array_equal(batch.increments[row], single.increments[0])
        assert np.array_equal(batch.path(1).increments, sample_brownian(3, 4, 1.0, 1 / 32, 2).increments)

    def test_increments_on_lattice(self):
        grid = sample_brownian(1, 0, 1.0, 1 / 256, 1)
        assert np.array_equal(snap_to_lattice(grid.increments), grid.increments)

    def test_increment_variance(self):
        grid = sample_brownian_batch(0, range(200), 1.0, 1 / 100, 1)
        # 2·10^4 N(0, 1/100) draws
        assert grid.increments.var() == pytest.approx(0.01, rel=0.05)

    def test_non_commensurable_horizon(self):
        with pytest.raises(GridMismatchError):
            sample_brownian(0, 0, 1.0, 0.3, 1)
        with pytest.raises(GridMismatchError):
            steps_for(2.0, 0.75)

    def test_coarsen_identity(self):
        grid = sample_brownian(0, 0, 1.0, 1 / 8, 1)
        assert coarsen(grid, 1) is grid

    def test_coarsen_pairs(self):
        coarse = coarsen(_grid([1.0, 2.0, 3.0, 4.0]), 2)
        assert coarse.increments[0, :, 0].tolist() == [3.0, 7.0]
        assert coarse.step == 0.5
        assert coarse.coarsening == 2

    def test_coarsen_non_divisor(self):
        with pytest.raises(GridMismatchError):
            coarsen(_grid([1.0, 2.0, 3.0, 4.0]), 3)

    @given(st.integers(min_value=0, max_value=SEED_LIMIT - 1), st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_coarsening_chain_is_exact(self, seed, path_index):
        fine = sample_brownian(seed, path_index, 2.0, 1 / 64, 1)
        stepwise = coarsen(coarsen(coarsen(fine, 2), 2), 2)
        direct = coarsen(fine, 8)
        assert np.array_equal(stepwise.increments, direct.increments)
        assert coarsen(fine, 128).increments[0, 0, 0] == fine.increments.sum()


class TestMarks:
    def test_parse_and_moments(self):
        uniform = MarkDistribution.parse("uniform:-1,1")
        assert uniform.mean == 0.0
        assert uniform.support_radius == 1.0
        assert uniform.abs_moment(2) == pytest.approx(1 / 3)
        assert str(uniform) == "uniform:-1,1"
        gauss = MarkDistribution.parse("gauss:2")
        assert gauss.abs_moment(2) == pytest.approx(4.0)
        assert gauss.support_radius == math.inf
        assert MarkDistribution.parse("point:0.5").abs_moment(3) == 0.125

    @pytest.mark.parametrize("text", ["gauss", "gauss:-1", "cauchy:1", "uniform:1,0", "uniform:1", "point:x"])
    def test_parse_errors(self, text):
        with pytest.raises(InvalidParameterError):
            MarkDistribution.parse(text)

    @pytest.mark.parametrize("text", ["gauss:1.5", "uniform:-0.5,2", "point:0.7"])
    def test_quadrature_matches_moments(self, text):
        measure = MarkMeasure.parse(2.0, text)
        nodes, weights = measure.quadrature()
        assert nodes.shape[1] == 1
        assert weights.sum() == pytest.approx(2.0, rel=1e-12)
        assert weights @ nodes[:, 0] == pytest.approx(2.0 * measure.distribution.mean, abs=1e-12)
        assert weights @ nodes[:, 0] ** 2 == pytest.approx(measure.moment(2), rel=1e-10)

    def test_bounded_marks(self):
        marks = MarkMeasure.parse(1.0, "gauss:1").bounded_marks()
        assert np.abs(marks).max() == 1.0
        marks = MarkMeasure.parse(1.0, "uniform:-3,2").bounded_marks()
        assert np.abs(marks).max() == 3.0

    def test_negative_intensity(self):
        with pytest.raises(InvalidIntensityError):
            MarkMeasure.parse(-1.0, "gauss:1")


class TestJumps:
    def test_zero_intensity_is_empty(self):
        realization = sample_jumps(0, 0, 2.0, MarkMeasure.parse(0.0, "gauss:1"))
        assert len(realization) == 0
        assert realization.marks.shape == (0, 1)

    def test_times_sorted_inside_horizon(self, gauss_measure):
        realizations = [sample_jumps(5, i, 3.0, gauss_measure) for i in range(10)]
        assert sum(len(r) for r in realizations) > 0
        for realization in realizations:
            assert np.all(np.diff(realization.times) >= 0)
            assert np.all((realization.times > 0) & (realization.times <= 3.0))
            assert realization.marks.shape == (len(realization), 1)

    def test_deterministic(self, gauss_measure):
        a = sample_jumps(9, 1, 2.0, gauss_measure)
        b = sample_jumps(9, 1, 2.0, gauss_measure)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.marks, b.marks)

    def test_mean_count(self, gauss_measure):
        counts = np.array([len(sample_jumps(1, i, 2.0, gauss_measure)) for i in range(2000)])
        # Poisson(4)
        assert abs(counts.mean() - 4.0) <= 5 * math.sqrt(4.0 / 2000)
