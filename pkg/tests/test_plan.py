"""Plan model: thresholds, reconstruction, cost, distortion, serialization."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

import shiftadd as sa
from shiftadd.plan import reconstruct_exact
from shiftadd.pot import SignedPow2
from shiftadd.pow2matrix import Pow2Matrix

from helpers import random_plan


class TestThreshold:
    def test_values(self):
        assert sa.threshold(16) == pytest.approx(4.0 ** -15 / 3)
        assert 10 * math.log10(sa.threshold(16)) == pytest.approx(-95.1, abs=0.1)
        assert sa.threshold(1) == pytest.approx(1 / 3)
        assert sa.threshold(8) == pytest.approx(4.0 ** -7 / 3)
        with pytest.raises(ValueError):
            sa.threshold(0)

    def test_achieved_bits(self):
        assert sa.achieved_bits(0.0) == math.inf
        assert sa.achieved_bits(1.0) == 0.0
        for q in (1, 2, 8, 16, 24):
            thr = sa.threshold(q)
            assert sa.achieved_bits(thr) == q
            assert sa.achieved_bits(thr * 1.0001) == q - 1
            assert sa.achieved_bits(thr * 0.9999) == q


class TestReconstruct:
    def test_empty_stage_list_gives_codebook(self):
        for kind, n, k in [("mailman", 3, 8), ("two-sparse", 3, 7)]:
            cb = sa.make_codebook(kind, n, k)
            plan = sa.DecompositionPlan(n, k, cb, ())
            assert np.array_equal(sa.reconstruct(plan), cb.dense())

    def test_identity_wiring_permutes_and_scales(self):
        cb = sa.make_codebook("mailman", 2, 4)
        # one-sparse wiring: column k selects codebook column (k+1) % 4, halved
        cols = tuple((((k + 1) % 4, SignedPow2(1, -1)),) for k in range(4))
        plan = sa.DecompositionPlan(2, 4, cb, (Pow2Matrix(4, 4, cols),))
        expect = 0.5 * cb.dense()[:, [1, 2, 3, 0]]
        assert np.array_equal(sa.reconstruct(plan), expect)

    def test_exact_against_fraction_oracle(self):
        rng = np.random.default_rng(400)
        for _ in range(10):
            plan, _ = random_plan(rng, max_cols=16, max_stages=3)
            cols = reconstruct_exact(plan)
            # independent oracle: dense Fraction chain product
            dense = [[Fraction(float(v)) for v in row]
                     for row in plan.codebook.dense()]
            for stage in plan.stages:
                sd = stage.dense()
                dense = [[sum(dense[i][j] * Fraction(float(sd[j, k]))
                              for j in range(stage.rows))
                          for k in range(stage.cols)] for i in range(len(dense))]
            for k in range(plan.n_cols):
                for n in range(plan.n_rows):
                    m, e = cols[k][n]
                    assert Fraction(m) * Fraction(2) ** e == dense[n][k]

    def test_float_view_matches_fit_tracking(self):
        rng = np.random.default_rng(401)
        tgt = rng.standard_normal((4, 16))
        cb = sa.make_codebook("mailman", 4, 16)
        plan = sa.decompose(tgt, cb, sa.StageSchedule.fixed([1, 1]))
        rep = sa.distortion(plan, tgt)
        assert rep.rel_error == pytest.approx(plan.metadata["fit_rel_error"],
                                              rel=1e-9)


class TestCost:
    def test_mailman_only(self):
        plan = sa.DecompositionPlan(3, 8, sa.make_codebook("mailman", 3, 8), ())
        assert sa.cost_of(plan).additions == 10

    def test_no_op_plan_costs_nothing(self):
        cb = sa.make_codebook("two-sparse", 3, 3)  # unit columns only
        plan = sa.DecompositionPlan(3, 3, cb, ())
        rep = sa.cost_of(plan)
        assert rep.additions == 0 and rep.adds_per_entry == 0.0

    def test_cost_identity_self_design(self):
        rng = np.random.default_rng(402)
        k = 64
        tgt = rng.standard_normal((8, k))
        cb = sa.make_codebook("self-designing", 8, k, target=tgt)
        plan = sa.decompose(tgt, cb, sa.StageSchedule.fixed([1, 1, 1]))
        rep = sa.cost_of(plan)
        assert rep.additions == (3 + 2) * k
        assert rep.adds_per_entry == pytest.approx((3 + 2) * k / (8 * k))
        # matches the nonzeros - K form stage by stage
        for stage, adds in zip(plan.stages, rep.per_stage):
            assert adds == stage.nnz - k

    def test_achieved_bits_statistically_monotone_in_stages(self):
        rng = np.random.default_rng(403)
        means = []
        for stages in (1, 3, 5):
            bits = []
            for seed in range(20):
                srng = np.random.default_rng((403, seed))
                tgt = srng.standard_normal((4, 16))
                cb = sa.make_codebook("mailman", 4, 16)
                plan = sa.decompose(tgt, cb, sa.StageSchedule.fixed([1] * stages))
                bits.append(plan.metadata["fit_achieved_bits"])
            means.append(np.mean(bits))
        assert means[0] <= means[1] <= means[2]


class TestDistortion:
    def test_zero_for_own_reconstruction(self):
        rng = np.random.default_rng(404)
        plan, _ = random_plan(rng, max_cols=16, max_stages=2)
        rec = sa.reconstruct(plan)
        rep = sa.distortion(plan, rec)
        assert rep.rel_error == 0.0 and rep.db == -math.inf
        assert rep.achieved_bits == math.inf

    def test_scale_invariance(self):
        rng = np.random.default_rng(405)
        tgt = rng.standard_normal((3, 5))
        approx = tgt + 0.01 * rng.standard_normal((3, 5))
        from shiftadd.plan import distortion_of_matrix
        a = distortion_of_matrix(approx, tgt)
        b = distortion_of_matrix(2 * approx, 2 * tgt)
        assert a.rel_error == pytest.approx(b.rel_error, rel=1e-12)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(406)
        plan, tgt = random_plan(rng, max_cols=8, max_stages=1)
        with pytest.raises(sa.DimensionError):
            sa.distortion(plan, np.zeros((plan.n_rows + 1, plan.n_cols)))


class TestSerialization:
    def test_round_trip_random_plans(self):
        rng = np.random.default_rng(407)
        for _ in range(20):
            plan, _ = random_plan(rng, max_cols=32, max_stages=4)
            data = sa.serialize(plan)
            back = sa.deserialize(data)
            assert back == plan
            # coefficients preserved bit for bit
            for s1, s2 in zip(plan.stages, back.stages):
                assert s1.to_records() == s2.to_records()

    def test_truncated_stream(self):
        rng = np.random.default_rng(408)
        plan, _ = random_plan(rng, max_cols=8, max_stages=1)
        data = sa.serialize(plan)
        with pytest.raises(sa.PlanFormatError):
            sa.deserialize(data[: len(data) // 2])

    def test_unknown_version(self):
        rng = np.random.default_rng(409)
        plan, _ = random_plan(rng, max_cols=8, max_stages=1)
        doc = json.loads(sa.serialize(plan))
        doc["version"] = 999
        with pytest.raises(sa.PlanVersionError):
            sa.deserialize(json.dumps(doc).encode())

    def test_not_a_plan(self):
        with pytest.raises(sa.PlanFormatError):
            sa.deserialize(b'{"format": "something-else", "version": 1}')
        with pytest.raises(sa.PlanFormatError):
            sa.deserialize(b"[]")
