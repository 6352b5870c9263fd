import io
import math

import numpy as np
import pytest

from crowdgraphon.graphon import (
    GraphonSpec,
    binary_from_centered,
    build_graphon,
    centered_from_binary,
    eigensystem,
    embed_crowd_matrix,
    eval_f,
    f_matrix,
    f_values,
    mse,
    sample_graphon_matrix,
    sample_to_csv,
    spec_from_json,
    spec_to_json,
    verify_spectral,
)
from crowdgraphon.model import CrowdModel, ResponseMatrix, SpammerHammer, TrueAnswers
from oracles import block_operator_eigenvalues

HALF = build_graphon(0.5, 0.5, 0.5)


class TestBuildGraphon:
    def test_boundaries(self):
        assert HALF.boundaries == (0.25, 0.5, 0.75)

    def test_alpha_one_degenerates_second_band(self):
        spec = build_graphon(1.0, 0.5, 0.5)
        b1, b2, _ = spec.boundaries
        assert b1 == b2
        # the point beta now belongs to the spammer band
        assert spec.interval_of(0.5) == 2

    def test_sigma_small_shrinks_hammer_band(self):
        spec = build_graphon(0.5, 0.5, 1e-9)
        lo, hi = spec.intervals[3]
        assert hi - lo == pytest.approx(5e-10, rel=1e-6)

    def test_rejects_out_of_range(self):
        for bad in ((0.0, 0.5, 0.5), (0.5, 1.0, 0.5), (0.5, 0.5, 0.0), (1.5, 0.5, 0.5)):
            with pytest.raises(ValueError):
                build_graphon(*bad)

    def test_interval_cover(self):
        spec = build_graphon(0.3, 0.6, 0.2)
        intervals = spec.intervals
        assert intervals[0][0] == 0.0
        assert intervals[3][1] == 1.0
        for left, right in zip(intervals, intervals[1:]):
            assert left[1] == right[0]


class TestEvalF:
    def test_plus_task_hammer(self):
        assert eval_f(HALF, 0.1, 0.9) == 1

    def test_minus_task_hammer(self):
        assert eval_f(HALF, 0.3, 0.9) == -1

    def test_spammer_row_is_zero(self):
        for y in (0.0, 0.3, 0.6, 0.9, 1.0):
            assert eval_f(HALF, 0.6, y) == 0

    def test_boundary_point_maps_to_minus(self):
        # alpha*beta itself sits in the second band
        assert eval_f(HALF, 0.25, 0.9) == -1

    def test_symmetry_on_grid(self):
        spec = build_graphon(0.4, 0.55, 0.3)
        grid = np.linspace(0, 1, 41)
        fm = f_matrix(spec, grid)
        assert np.array_equal(fm, fm.T)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            eval_f(HALF, -0.1, 0.5)
        with pytest.raises(ValueError):
            eval_f(HALF, 0.5, 1.1)

    def test_rank_two_of_sampled_kernel(self):
        rng = np.random.default_rng(0)
        for spec in (HALF, build_graphon(0.3, 0.4, 0.6)):
            thetas = rng.random(80)
            fm = f_matrix(spec, thetas).astype(float)
            s = np.linalg.svd(fm, compute_uv=False)
            assert s[2] <= 1e-9 * 80


class TestEigenSystem:
    def test_closed_form_values(self):
        es = eigensystem(HALF)
        assert es.lambda1 == pytest.approx(math.sqrt(0.125), rel=1e-15)
        assert es.lambda2 == -es.lambda1
        assert es.amplitude == pytest.approx(math.sqrt(2), rel=1e-15)
        # hammer-band value of the first eigenfunction
        assert es.q1_values[3] == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_eigenvalues_match_block_operator(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            spec = build_graphon(*(0.05 + 0.9 * rng.random(3)))
            es = eigensystem(spec)
            eigs = block_operator_eigenvalues(spec)
            assert eigs[-1] == pytest.approx(es.lambda1, abs=1e-12)
            assert eigs[0] == pytest.approx(es.lambda2, abs=1e-12)
            assert np.all(np.abs(eigs[1:-1]) <= 1e-12)

    def test_amplitude_matches_grid_supremum(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            spec = build_graphon(*(0.05 + 0.9 * rng.random(3)))
            es = eigensystem(spec)
            grid = (np.arange(20001) + 0.5) / 20001
            sup = max(np.abs(es.q1_at(grid)).max(), np.abs(es.q2_at(grid)).max())
            assert sup == pytest.approx(es.amplitude, abs=1e-12)

    def test_degenerate_spectrum_rejected(self):
        class Flat:
            alpha, beta, sigma2 = 0.5, 0.5, 0.0

        with pytest.raises(ValueError):
            eigensystem(Flat())


class TestVerifySpectral:
    def test_reference_spec_residuals(self):
        check = verify_spectral(HALF, grid_points=101)
        assert check.max_pointwise_residual <= 1e-12
        assert check.gram_residual <= 1e-12

    def test_random_specs(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            spec = build_graphon(*(0.05 + 0.9 * rng.random(3)))
            check = verify_spectral(spec, grid_points=151)
            assert check.max_pointwise_residual <= 1e-12
            assert check.gram_residual <= 1e-12

    def test_orthogonality_is_structural(self):
        spec = build_graphon(0.23, 0.71, 0.37)
        es = eigensystem(spec)
        lengths = spec.interval_lengths
        assert float(np.sum(lengths * es.q1_values * es.q2_values)) == pytest.approx(0.0, abs=1e-15)


class TestSampleGraphonMatrix:
    def test_density_zero(self):
        sample = sample_graphon_matrix(HALF, 50, 0.0, seed=0)
        assert len(sample) == 0

    def test_deterministic_pairs(self):
        # f = +1 pairs are observed as +1 with probability one
        sample = sample_graphon_matrix(HALF, 400, 1.0, seed=1)
        band_i = HALF.interval_of(sample.theta[sample.rows])
        band_j = HALF.interval_of(sample.theta[sample.cols])
        sure_plus = (band_i == 0) & (band_j == 3) | (band_i == 3) & (band_j == 0)
        assert np.all(sample.values[sure_plus] == 1)
        sure_minus = (band_i == 1) & (band_j == 3) | (band_i == 3) & (band_j == 1)
        assert np.all(sample.values[sure_minus] == -1)

    def test_centered_mean_on_zero_band(self):
        sample = sample_graphon_matrix(HALF, 1700, 1.0, seed=2)
        f = f_values(HALF, sample.theta[sample.rows], sample.theta[sample.cols])
        zero_entries = sample.values[f == 0]
        assert zero_entries.size > 10**6
        assert abs(zero_entries.mean()) < 0.003

    def test_sampling_law_for_each_level(self):
        spec = build_graphon(0.4, 0.5, 0.5)
        sample = sample_graphon_matrix(spec, 1200, 0.7, seed=3)
        f = f_values(spec, sample.theta[sample.rows], sample.theta[sample.cols])
        for level in (-1, 0, 1):
            vals = sample.values[f == level]
            target = (1 + level) / 2
            se = math.sqrt(max(target * (1 - target), 0.25) / max(vals.size, 1))
            assert abs(np.mean(vals == 1) - target) <= max(3 * se, 1e-12)

    def test_symmetric_lookup(self):
        sample = sample_graphon_matrix(HALF, 30, 0.8, seed=4)
        (i, j), v = next(sample.entries())
        assert sample.get(i, j) == v
        assert sample.get(j, i) == v

    def test_observation_density(self):
        n = 300
        sample = sample_graphon_matrix(HALF, n, 0.3, seed=5)
        total = n * (n + 1) / 2
        se = math.sqrt(0.3 * 0.7 / total)
        assert abs(len(sample) / total - 0.3) <= 4 * se

    def test_seed_determinism(self):
        a = sample_graphon_matrix(HALF, 40, 0.5, seed=6)
        b = sample_graphon_matrix(HALF, 40, 0.5, seed=6)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.values, b.values)


class TestEmbedCrowdMatrix:
    def test_smallest_case(self):
        m = ResponseMatrix.from_entries(1, 1, {(0, 0): 1})
        y = embed_crowd_matrix(m, seed=0)
        assert y.shape == (2, 2)
        assert y[0, 1] == 1 and y[1, 0] == 1
        assert y[0, 0] in (-1, 1) and y[1, 1] in (-1, 1)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        values = rng.choice([-1, 1], size=(6, 4))
        entries = {(i, j): int(values[i, j]) for i in range(6) for j in range(4)}
        m = ResponseMatrix.from_entries(6, 4, entries)
        for seed in range(5):
            y = embed_crowd_matrix(m, seed=seed)
            assert np.array_equal(y, y.T)
            assert np.array_equal(y[:6, 6:], values)

    def test_requires_full_observation(self):
        m = ResponseMatrix.from_entries(2, 2, {(0, 0): 1})
        with pytest.raises(ValueError):
            embed_crowd_matrix(m, seed=0)

    def test_coin_blocks_are_fair(self):
        t, w = 300, 200
        answers = TrueAnswers(np.ones(t, dtype=int))
        model = CrowdModel(SpammerHammer(0.5, np.zeros(w, dtype=bool)), answers)
        from crowdgraphon.assignment import uniform_assignment
        from crowdgraphon.model import sample_responses

        m = sample_responses(model, uniform_assignment(t, w, w, seed=1), seed=2)
        y = embed_crowd_matrix(m, seed=3)
        q = y[:t, :t]
        frac = np.mean(q[np.triu_indices(t)] == 1)
        assert abs(frac - 0.5) < 0.01


class TestMse:
    def test_zero_when_equal(self):
        a = np.random.default_rng(0).random((5, 5))
        assert mse(a, a) == 0.0

    def test_constant_offset(self):
        a = np.zeros((4, 6))
        assert mse(a + 0.5, a) == pytest.approx(0.25, rel=1e-15)

    def test_signs_vs_zero(self):
        values = np.random.default_rng(1).choice([-1.0, 1.0], size=(8, 8))
        assert mse(values, np.zeros((8, 8))) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros((2, 2)), np.zeros((2, 3)))


class TestConversionsAndIo:
    def test_centered_round_trip(self):
        y01 = np.array([[0, 1], [1, 0]])
        assert np.array_equal(binary_from_centered(centered_from_binary(y01)), y01)

    def test_spec_json_round_trip(self):
        spec = build_graphon(0.3, 0.6, 0.2)
        assert spec_from_json(spec_to_json(spec)) == spec

    def test_edge_list_csv(self):
        sample = sample_graphon_matrix(HALF, 5, 1.0, seed=8)
        buf = io.StringIO()
        sample_to_csv(sample, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "i,j,value"
        assert len(lines) == 1 + len(sample)
