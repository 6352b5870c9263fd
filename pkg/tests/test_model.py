import json

import numpy as np
import pytest

from crowdgraphon.assignment import uniform_assignment
from crowdgraphon.model import (
    CrowdModel,
    DawidSkene,
    Difficulty,
    DType,
    Monotone,
    ResponseMatrix,
    SpammerHammer,
    TrueAnswers,
    bernoulli_answers,
    bernoulli_hammers,
    expected_response,
    expected_response_matrix,
    model_from_json,
    model_to_json,
    sample_responses,
    skill,
    skill_matrix,
    uniform_types,
)


def dtype_model(d=2, p=0.9, task_types=(0, 1), worker_types=(0, 1), answers=(1, -1)):
    return CrowdModel(
        DType(d, p, np.asarray(task_types), np.asarray(worker_types)),
        TrueAnswers(np.asarray(answers)),
    )


class TestSkill:
    def test_dtype_matched(self):
        m = dtype_model(p=0.9)
        assert skill(m, 0, 0) == 0.9

    def test_dtype_unmatched(self):
        m = dtype_model(p=0.9)
        assert skill(m, 0, 1) == 0.5

    def test_difficulty_formula(self):
        # t*w + (1-t)(1-w) at t=0.8, w=0.7
        m = CrowdModel(Difficulty([0.8], [0.7]), TrueAnswers([1]))
        assert skill(m, 0, 0) == pytest.approx(0.62, abs=1e-15)

    def test_dawid_skene_ignores_task(self):
        m = CrowdModel(DawidSkene([0.7, 0.2]), TrueAnswers([1, -1, 1]))
        assert skill(m, 0, 0) == 0.7
        assert skill(m, 2, 0) == 0.7

    def test_monotone_formula(self):
        m = CrowdModel(Monotone([0.4], [0.9]), TrueAnswers([1]))
        assert skill(m, 0, 0) == pytest.approx(0.9 * 0.6 + 0.2, abs=1e-15)

    def test_index_errors(self):
        m = dtype_model()
        with pytest.raises(IndexError):
            skill(m, 2, 0)
        with pytest.raises(IndexError):
            skill(m, 0, 5)

    def test_skills_in_unit_interval_all_variants(self):
        rng = np.random.default_rng(3)
        variants = [
            DawidSkene(rng.random(7)),
            Difficulty(0.5 + 0.5 * rng.random(5), rng.random(7)),
            Monotone(rng.random(5), rng.random(7)),
            DType(3, 0.8, rng.integers(0, 3, 5), rng.integers(0, 3, 7)),
            SpammerHammer(0.4, rng.random(7) < 0.4),
        ]
        for variant in variants:
            answers = TrueAnswers(np.where(rng.random(5) < 0.5, 1, -1))
            f = skill_matrix(CrowdModel(variant, answers))
            assert np.all(f >= 0.0) and np.all(f <= 1.0)

    def test_dtype_skills_two_valued(self):
        m = dtype_model(d=3, p=0.77, task_types=(0, 1, 2, 0), worker_types=(1, 2, 0), answers=(1, 1, -1, -1))
        f = skill_matrix(m)
        assert set(np.unique(f)) == {0.5, 0.77}


class TestExpectedResponse:
    def test_fully_reliable(self):
        m = CrowdModel(DawidSkene([1.0]), TrueAnswers([1]))
        assert expected_response(m, 0, 0) == 1.0

    def test_coin_flip_worker(self):
        m = CrowdModel(DawidSkene([0.5]), TrueAnswers([1]))
        assert expected_response(m, 0, 0) == 0.0

    def test_dtype_matched_negative_answer(self):
        # a_i (2p - 1) at p = 0.9, a_i = -1
        m = dtype_model(p=0.9, answers=(-1, -1))
        assert expected_response(m, 0, 0) == pytest.approx(-0.8, abs=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rank_one_variants(self, seed):
        rng = np.random.default_rng(seed)
        t, w = 50, 50
        answers = TrueAnswers(np.where(rng.random(t) < 0.5, 1, -1))
        for variant in (
            DawidSkene(rng.random(w)),
            Difficulty(0.5 + 0.5 * rng.random(t), rng.random(w)),
            Monotone(rng.random(t), rng.random(w)),
        ):
            em = expected_response_matrix(CrowdModel(variant, answers))
            s = np.linalg.svd(em, compute_uv=False)
            assert s[1] <= 1e-9

    def test_rank_d_dtype(self):
        rng = np.random.default_rng(7)
        d, t, w = 4, 40, 30
        task_types = np.concatenate([np.arange(d), rng.integers(0, d, t - d)])
        worker_types = np.concatenate([np.arange(d), rng.integers(0, d, w - d)])
        m = CrowdModel(
            DType(d, 0.9, task_types, worker_types),
            TrueAnswers(np.where(rng.random(t) < 0.5, 1, -1)),
        )
        s = np.linalg.svd(expected_response_matrix(m), compute_uv=False)
        assert s[d - 1] > 1e-6
        assert s[d] <= 1e-9


class TestSampleResponses:
    def test_deterministic_at_extremes(self):
        answers = TrueAnswers([1, -1, 1])
        assignment = uniform_assignment(3, 4, 4, seed=0)
        sure = CrowdModel(DawidSkene([1.0] * 4), answers)
        m = sample_responses(sure, assignment, seed=5)
        for (i, _), v in m.items():
            assert v == answers.values[i]
        hopeless = CrowdModel(DawidSkene([0.0] * 4), answers)
        m = sample_responses(hopeless, assignment, seed=5)
        for (i, _), v in m.items():
            assert v == -answers.values[i]

    def test_monte_carlo_mean(self):
        # E[M] = 2F - 1 = 0.5 at F = 0.75
        n = 10**6
        m = CrowdModel(Difficulty([1.0], [0.75]), TrueAnswers([1]))
        assignment = uniform_assignment(1, 1, 1, seed=0)
        rng_mean = np.mean(
            [sample_responses(m, assignment, seed=s).values[0] for s in range(200)]
        )
        # tight check via one big vectorized model instead of many tiny draws
        big = CrowdModel(Difficulty(np.full(n, 1.0), [0.75]), TrueAnswers(np.ones(n)))
        big_assignment = uniform_assignment(n, 1, 1, seed=0)
        values = sample_responses(big, big_assignment, seed=11).values
        assert abs(values.mean() - 0.5) < 0.003
        assert -1.0 <= rng_mean <= 1.0

    def test_empirical_frequency_matches_skill(self):
        # fixed (i, j) pair, binomial three-sigma band around F = 0.62
        n = 200_000
        m = CrowdModel(Difficulty(np.full(n, 0.8), [0.7]), TrueAnswers(np.ones(n)))
        assignment = uniform_assignment(n, 1, 1, seed=0)
        values = sample_responses(m, assignment, seed=3).values
        freq = np.mean(values == 1)
        se = np.sqrt(0.62 * 0.38 / n)
        assert abs(freq - 0.62) <= 3 * se

    def test_seed_determinism(self):
        m = dtype_model(d=2, p=0.7, task_types=(0, 1, 1), worker_types=(0, 1, 0), answers=(1, -1, 1))
        assignment = uniform_assignment(3, 3, 2, seed=9)
        a = sample_responses(m, assignment, seed=42)
        b = sample_responses(m, assignment, seed=42)
        c = sample_responses(m, assignment, seed=43)
        assert a == b
        assert a != c

    def test_independence_across_entries(self):
        # empirical correlation of two coin-flip workers stays at noise level
        n = 100_000
        m = CrowdModel(DawidSkene([0.5, 0.5]), TrueAnswers(np.ones(n)))
        assignment = uniform_assignment(n, 2, 2, seed=0)
        values = sample_responses(m, assignment, seed=1).values.reshape(n, 2).astype(float)
        corr = np.corrcoef(values[:, 0], values[:, 1])[0, 1]
        assert abs(corr) < 0.01


class TestResponseMatrix:
    def test_round_trip_entries(self):
        entries = {(0, 1): 1, (2, 0): -1, (0, 0): -1}
        m = ResponseMatrix.from_entries(3, 2, entries)
        assert dict(m.items()) == entries
        assert m.get(2, 0) == -1
        with pytest.raises(KeyError):
            m.get(1, 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            ResponseMatrix.from_entries(2, 2, {(0, 0): 2})
        with pytest.raises(ValueError):
            ResponseMatrix.from_entries(2, 2, {(3, 0): 1})

    def test_merge_disjoint(self):
        a = ResponseMatrix.from_entries(3, 2, {(0, 0): 1})
        b = ResponseMatrix.from_entries(3, 2, {(1, 1): -1, (0, 1): 1})
        merged = a.merge(b)
        assert dict(merged.items()) == {(0, 0): 1, (0, 1): 1, (1, 1): -1}


class TestGenerators:
    def test_uniform_types_range_and_determinism(self):
        t = uniform_types(1000, 3, seed=0)
        assert set(np.unique(t)) <= {0, 1, 2}
        assert np.array_equal(t, uniform_types(1000, 3, seed=0))

    def test_bernoulli_answers_prior(self):
        a = bernoulli_answers(100_000, 0.3, seed=1)
        assert abs(np.mean(a.values == 1) - 0.3) < 0.01

    def test_bernoulli_hammers_rate(self):
        h = bernoulli_hammers(100_000, 0.25, seed=2)
        assert abs(h.mean() - 0.25) < 0.01


class TestSerialization:
    @pytest.mark.parametrize(
        "variant",
        [
            DawidSkene([0.7, 0.4]),
            Difficulty([0.8, 0.6], [0.7, 0.1]),
            Monotone([0.3, 0.9], [0.7, 0.1]),
            DType(2, 0.9, [0, 1, 1], [1, 0]),
            SpammerHammer(0.5, [True, False]),
        ],
    )
    def test_json_round_trip(self, variant):
        t = variant.num_tasks() or 3
        model = CrowdModel(variant, TrueAnswers([1, -1, 1][:t]))
        text = model_to_json(model)
        back = model_from_json(text)
        assert model_to_json(back) == text
        assert np.array_equal(back.answers.values, model.answers.values)
        assert np.allclose(skill_matrix(back), skill_matrix(model))

    def test_json_is_plain_data(self):
        model = dtype_model()
        data = json.loads(model_to_json(model))
        assert data["variant"] == "d_type"
        assert data["p"] == 0.9


class TestValidation:
    def test_answers_must_be_signs(self):
        with pytest.raises(ValueError):
            TrueAnswers([1, 0, -1])

    def test_dtype_p_range(self):
        with pytest.raises(ValueError):
            DType(2, 0.4, [0], [0])

    def test_difficulty_range(self):
        with pytest.raises(ValueError):
            Difficulty([0.3], [0.5])

    def test_type_labels_in_range(self):
        with pytest.raises(ValueError):
            DType(2, 0.9, [0, 2], [0])

    def test_answer_length_must_match_variant(self):
        with pytest.raises(ValueError):
            CrowdModel(Difficulty([0.8, 0.9], [0.5]), TrueAnswers([1]))
