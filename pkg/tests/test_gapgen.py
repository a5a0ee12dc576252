import math

import numpy as np
import pytest

from naeopt.errors import DomainError, StructuralError
from naeopt import gapgen as G
from naeopt import hardness as H
from naeopt import pipeline as P

SMALL = dict(n=48, m3=400, m5=400, seed=13)


@pytest.fixture(scope="module")
def small_gap():
    return G.gen_gap_instance(**SMALL)


class TestSparseVec:
    def test_validation(self):
        with pytest.raises(StructuralError):
            G.SparseVec((2, 1, 3), (1, 1, 1))
        with pytest.raises(StructuralError):
            G.SparseVec((0, 1, 2), (1, 2, 1))

    def test_canonicalization(self):
        v = G.SparseVec((0, 1, 2), (-1, -1, 1))
        rep, orient = v.canonical()
        assert orient == -1 and rep.signs == (1, 1, -1)
        rep2, orient2 = rep.canonical()
        assert rep2 == rep and orient2 == 1

    def test_unit_norm_and_dot(self):
        v = G.SparseVec((0, 3, 7), (1, -1, 1))
        assert abs(np.linalg.norm(v.dense(10)) - 1.0) < 1e-15
        w = G.SparseVec((0, 3, 9), (1, 1, 1))
        assert v.dot_numerator(w) == 0       # +1 - 1 on shared coords
        assert abs(v.dense(10) @ w.dense(10)) < 1e-15


class TestGeneration:
    def test_exact_bias_patterns(self, small_gap):
        for vecs in small_gap.clause_vectors[: small_gap.num_3clauses]:
            for a in range(3):
                for b in range(a + 1, 3):
                    assert vecs[a].dot_numerator(vecs[b]) == -1
        for vecs in small_gap.clause_vectors[small_gap.num_3clauses:]:
            for a in range(4):
                for b in range(a + 1, 4):
                    assert vecs[a].dot_numerator(vecs[b]) == 1
                assert vecs[a].dot_numerator(vecs[4]) == 0

    def test_weights(self, small_gap):
        inst = small_gap.instance
        assert abs(inst.total_weight - 1.0) < 1e-12
        w3 = sum(c.weight for c in inst.clauses if len(c.literals) == 3)
        assert abs(w3 - (1 - 3 / math.sqrt(21))) < 1e-12

    def test_variables_are_canonical(self, small_gap):
        for v in small_gap.variables:
            assert v.positives >= 2

    def test_small_n_rejected(self):
        with pytest.raises(DomainError):
            G.gen_gap_instance(11, 10, 10, seed=0)

    def test_deterministic(self):
        a = G.gen_gap_instance(24, 50, 50, seed=3)
        b = G.gen_gap_instance(24, 50, 50, seed=3)
        assert a.instance == b.instance and a.variables == b.variables

    def test_file_round_trip(self, small_gap):
        text_i = P.format_instance(small_gap.instance)
        text_v = P.format_vectors(small_gap.vector_assignment(),
                                  small_gap.sparse_rows())
        back = G.load_gap(text_i, text_v)
        assert back.variables == small_gap.variables
        assert back.instance == small_gap.instance
        assert back.num_3clauses == small_gap.num_3clauses
        assert back.num_5clauses == small_gap.num_5clauses

    def test_gram_of_vectors_is_valid(self, small_gap):
        from naeopt.core import GramConfig, validate_gram
        va = small_gap.vector_assignment()
        assert validate_gram(GramConfig.from_vectors(va.vectors[:50])).accepted


class TestWitnesses:
    def test_rows_satisfy_nae(self):
        for kind in (3, 5):
            for prob, row in G.completeness_witness(kind):
                assert prob > 0
                assert max(row) != min(row)

    def test_probabilities_sum_to_one(self):
        for kind in (3, 5):
            assert abs(sum(p for p, _ in G.completeness_witness(kind)) - 1.0) < 1e-15

    def test_pair_expectations_match_biases(self):
        assert np.allclose(G.witness_pair_expectations(3), -1 / 3, atol=1e-15)
        w5 = G.witness_pair_expectations(5)
        # order: (1,2),(1,3),(1,4),(1,5),(2,3),(2,4),(2,5),(3,4),(3,5),(4,5)
        want = [1 / 3, 1 / 3, 1 / 3, 0, 1 / 3, 1 / 3, 0, 1 / 3, 0, 0]
        assert np.allclose(w5, want, atol=1e-15)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            G.completeness_witness(4)


class TestSunflower:
    def test_pairwise_dot_third(self):
        for seed in range(5):
            vecs = G.sunflower_sample(30, 5, seed)
            for a in range(5):
                for b in range(a + 1, 5):
                    assert vecs[a].dot_numerator(vecs[b]) == 1

    def test_single_vector(self):
        (v,) = G.sunflower_sample(10, 1, 0)
        assert isinstance(v, G.SparseVec)

    def test_dimension_requirement(self):
        with pytest.raises(DomainError):
            G.sunflower_sample(10, 5, 0)


class TestAssignmentMoments:
    def test_tuned_rule_hits_targets(self):
        f2, f4 = G.assignment_moments((G.P1_STAR, 0.0), 48, samples=4 * 10**5, seed=2)
        assert abs(f2.value - G.F2_STAR) < 3 * f2.std_error
        assert abs(f4.value - G.F2_STAR**2) < 3 * f4.std_error

    def test_deterministic_rule_f2_zero(self):
        f2, f4 = G.assignment_moments((1.0, 0.0), 48, samples=10**5, seed=4)
        assert abs(f2.value) < 3 * max(f2.std_error, 1e-4)

    def test_random_rule_f2_zero(self):
        f2, _ = G.assignment_moments((0.5, 0.5), 48, samples=10**5, seed=5)
        assert abs(f2.value) < 3 * f2.std_error

    def test_f2_is_a_square(self):
        for p1, p2 in ((0.3, 0.1), (0.9, 0.4), (0.0, 0.0)):
            f2, _ = G.assignment_moments((p1, p2), 48, samples=10**5, seed=6)
            m = (p1 + p2 - 1.0) / 2.0
            assert abs(f2.value - m * m) < 3 * max(f2.std_error, 1e-12)
            assert f2.value > -3 * f2.std_error

    def test_callable_rule_f4_dominates(self):
        def parity(rep: G.SparseVec) -> int:
            return rep.signs[0] * rep.signs[1] * rep.signs[2]

        for n in (24, 48, 96):
            f2, f4 = G.assignment_moments(parity, n, samples=4000, seed=8)
            slack = 3 * (f2.std_error + f4.std_error) + 10.0 / n
            assert f4.value >= f2.value**2 - slack


class TestEvaluateGap:
    def test_tuned_rule_three_way_agreement(self, small_gap):
        res = G.evaluate_gap(small_gap, (G.P1_STAR, 0.0), trials=24, seed=9,
                             moment_samples=2 * 10**5)
        assert abs(res.fraction - res.expected_fraction) < 3 * res.std_error
        assert abs(res.expected_fraction - res.analytic_prediction) \
            < 3 * math.hypot(res.clause_sampling_sigma, 3 * res.f2.std_error)
        assert abs(res.analytic_prediction - H.BOUND) < 0.01

    def test_random_rule(self, small_gap):
        res = G.evaluate_gap(small_gap, (0.5, 0.5), trials=24, seed=10,
                             moment_samples=10**5)
        want = G.WEIGHT_3 * 0.75 + G.WEIGHT_5 * 15 / 16
        assert abs(res.expected_fraction - want) < 1e-12
        assert abs(res.fraction - want) < 3 * max(res.std_error, 1e-4)

    def test_all_ones_rule_consistency(self, small_gap):
        # p1 = p2 = 1: every representative rounds to +1 deterministically
        res = G.evaluate_gap(small_gap, (1.0, 1.0), trials=2, seed=11,
                             moment_samples=10**4)
        assert res.std_error == 0.0
        assert abs(res.fraction - res.expected_fraction) < 1e-12


class TestSoundnessUpper:
    def test_worst_point(self):
        v = G.soundness_upper_estimate(G.F2_STAR, G.F2_STAR**2)
        assert abs(v - H.BOUND) < 1e-12

    def test_zero_moments(self):
        p = 0.4
        assert abs(G.soundness_upper_estimate(0.0, 0.0, p) - (12 + 3 * p) / 16) < 1e-15

    def test_pure_three(self):
        assert G.soundness_upper_estimate(1 / 3, 0.2, p=0.0) == 1.0

    def test_slack_floor(self):
        # F4 below F2^2 - slack is clipped up before the bound is formed
        lifted = G.soundness_upper_estimate(0.2, -1.0, p=0.5, slack=0.01)
        direct = H.mixture_value(0.5, 0.2, 0.2**2 - 0.01)
        assert abs(lifted - direct) < 1e-15
