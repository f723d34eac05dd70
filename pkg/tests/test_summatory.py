import math
import random

import numpy as np
import pytest

import divisum.tables as sv
from divisum import summatory as sm
from conftest import brute_divisor_count, brute_dk, brute_summatory


class TestFloorQuotients:
    def test_example_10(self):
        fq = sm.floor_quotients(10)
        assert fq.blocks == [(10, 1, 1), (5, 2, 2), (3, 3, 3), (2, 4, 5), (1, 6, 10)]

    def test_example_1(self):
        assert sm.floor_quotients(1).blocks == [(1, 1, 1)]

    def test_example_4(self):
        assert sm.floor_quotients(4).blocks == [(4, 1, 1), (2, 2, 2), (1, 3, 4)]

    def test_exhaustive_small(self):
        for x in range(1, 400):
            fq = sm.floor_quotients(x)
            n = 1
            for q, lo, hi in fq:
                assert lo == n
                for m in (lo, hi):
                    assert x // m == q
                if hi < x:
                    assert x // (hi + 1) < q
                n = hi + 1
            assert n == x + 1

    def test_random_structure_to_1e12(self):
        rng = random.Random(1729)
        for _ in range(200):
            x = rng.randrange(1, 10**12)
            fq = sm.floor_quotients(x)
            root = math.isqrt(x)
            assert len(fq) <= 2 * root
            # blocks partition [1, x]
            assert int(fq.n_lo[0]) == 1 and int(fq.n_hi[-1]) == x
            assert (fq.n_lo[1:] == fq.n_hi[:-1] + 1).all()
            # quotients strictly decrease and are consistent at block edges
            assert (np.diff(fq.q) < 0).all()
            assert (x // fq.n_lo == fq.q).all()
            assert (x // fq.n_hi == fq.q).all()

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            sm.floor_quotients(0)


class TestOracle:
    def test_examples(self):
        assert sm.summatory_oracle(sv.DIVISOR, 10).value == 27
        assert sm.summatory_oracle(sv.DIVISOR_SQUARED, 10).value == 83
        assert sm.summatory_oracle(sv.DIVISOR, 1).value == 1

    def test_matches_brute_force(self):
        for x in (1, 2, 17, 100, 257):
            assert sm.summatory_oracle(sv.DIVISOR, x).value == brute_summatory(
                brute_divisor_count, x
            )
            assert sm.summatory_oracle(sv.divisor_k(3), x).value == brute_summatory(
                lambda n: brute_dk(n, 3), x
            )

    def test_method_field(self):
        assert sm.summatory_oracle(sv.DIVISOR, 5).method == "sieve"

    def test_multi_point_sweep_matches_single(self):
        xs = [500, 3, 77, 500, 12]
        got = sm.oracle_prefix_values(sv.DIVISOR_SQUARED, xs)
        for x, v in zip(xs, got):
            assert v == sm.summatory_oracle(sv.DIVISOR_SQUARED, x).value

    def test_segmented_sweep_matches_in_memory(self):
        # force the streaming path by dropping the segment length
        import divisum.summatory as mod

        xs = [1, 999, 10**5, 54321]
        direct = sm.oracle_prefix_values(sv.DIVISOR, xs)
        old = mod.DEFAULT_SEGMENT_LENGTH
        try:
            mod.DEFAULT_SEGMENT_LENGTH = 1000
            streamed = sm.oracle_prefix_values(sv.DIVISOR, xs)
        finally:
            mod.DEFAULT_SEGMENT_LENGTH = old
        assert streamed == direct

    def test_mobius_not_summable(self):
        with pytest.raises(ValueError):
            sm.summatory_oracle(sv.MOBIUS, 10)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            sm.summatory_oracle(sv.DIVISOR, 0)


class TestHyperbola:
    def test_examples(self):
        assert sm.divisor_summatory_hyperbola(10).value == 27
        assert sm.divisor_summatory_hyperbola(1).value == 1
        assert sm.divisor_summatory_hyperbola(4).value == 8

    def test_identity_against_naive_floor_sum(self):
        # D_2(x) = sum_{n<=x} floor(x/n), both sides computed independently
        for x in list(range(1, 2001)) + [5000, 9999, 10**4]:
            naive = sum(x // n for n in range(1, x + 1))
            assert sm.divisor_summatory_hyperbola(x).value == naive

    def test_python_int_fallback_agrees(self):
        import divisum.summatory as mod

        for x in (10**6 + 7, 123456789):
            fast = sm._d2_raw(x)
            slow = 2 * sum(x // n for n in range(1, math.isqrt(x) + 1)) - math.isqrt(x) ** 2
            assert fast == slow

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            sm.divisor_summatory_hyperbola(0)


class TestD4AndMeanSquare:
    def test_d4_examples(self):
        assert sm.d4_summatory(4).value == 19
        assert sm.d4_summatory(1).value == 1
        assert sm.d4_summatory(6).value == 39

    def test_mean_square_examples(self):
        assert sm.mean_square_summatory(4).value == 18
        assert sm.mean_square_summatory(10).value == 83
        assert sm.mean_square_summatory(1).value == 1

    def test_methods(self):
        assert sm.d4_summatory(5).method == "dirichlet_square"
        assert sm.mean_square_summatory(5).method == "mobius_weighted"

    def test_exhaustive_oracle_equivalence(self):
        limit = 1500
        d4_prefix = sm.oracle_prefix_values(sv.divisor_k(4), list(range(1, limit + 1)))
        s_prefix = sm.oracle_prefix_values(sv.DIVISOR_SQUARED, list(range(1, limit + 1)))
        for x in range(1, limit + 1):
            assert sm.d4_summatory(x).value == d4_prefix[x - 1]
            assert sm.mean_square_summatory(x).value == s_prefix[x - 1]

    def test_geometric_samples_match_oracle(self):
        for x in (10**4, 10**5, 3 * 10**5):
            assert (
                sm.mean_square_summatory(x).value
                == sm.summatory_oracle(sv.DIVISOR_SQUARED, x).value
            )
            assert (
                sm.d4_summatory(x).value
                == sm.summatory_oracle(sv.divisor_k(4), x).value
            )

    def test_discrete_derivative_recovers_pointwise_square(self):
        rng = random.Random(99)
        for _ in range(25):
            x = rng.randrange(2, 20000)
            step = (
                sm.mean_square_summatory(x).value
                - sm.mean_square_summatory(x - 1).value
            )
            assert step == brute_divisor_count(x) ** 2

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            sm.d4_summatory(0)
        with pytest.raises(ValueError):
            sm.mean_square_summatory(0)


class TestRecursion:
    def test_examples(self):
        assert sm.dk_summatory_recursive(1, 7).value == 7
        assert sm.dk_summatory_recursive(2, 10).value == 27
        assert sm.dk_summatory_recursive(3, 4).value == 13

    def test_method(self):
        assert sm.dk_summatory_recursive(3, 9).method == "recursion"

    def test_exhaustive_against_oracle(self):
        limit = 800
        for k in (2, 3, 4, 5):
            prefix = sm.oracle_prefix_values(sv.divisor_k(k), list(range(1, limit + 1)))
            for x in range(1, limit + 1):
                assert sm.dk_summatory_recursive(k, x).value == prefix[x - 1], (k, x)

    def test_object_dtype_path_agrees(self, monkeypatch):
        import divisum.summatory as mod

        expected = [sm.dk_summatory_recursive(4, x).value for x in (977, 5000)]
        monkeypatch.setattr(mod, "_NP_SAFE_WEIGHTED_X", 1)
        got = [sm.dk_summatory_recursive(4, x).value for x in (977, 5000)]
        assert got == expected

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            sm.dk_summatory_recursive(0, 5)
        with pytest.raises(ValueError):
            sm.dk_summatory_recursive(2, 0)


class TestMethodIndependence:
    def test_all_methods_agree(self):
        rng = random.Random(4242)
        xs = [rng.randrange(1, 10**6) for _ in range(8)]
        for x in xs:
            hyp = sm.divisor_summatory_hyperbola(x).value
            rec = sm.dk_summatory_recursive(2, x).value
            assert hyp == rec
        for x in xs[:4]:
            assert (
                sm.d4_summatory(x).value == sm.dk_summatory_recursive(4, x).value
            )

    def test_monotone_nondecreasing(self):
        prev_s = prev_d4 = 0
        for x in range(1, 300):
            s = sm.mean_square_summatory(x).value
            d4 = sm.d4_summatory(x).value
            assert s >= prev_s and d4 >= prev_d4
            prev_s, prev_d4 = s, d4


class TestSummatoryValue:
    def test_invariants(self):
        with pytest.raises(ValueError):
            sm.SummatoryValue(x=0, value=1, method="sieve")
        with pytest.raises(ValueError):
            sm.SummatoryValue(x=1, value=0, method="sieve")
        with pytest.raises(ValueError):
            sm.SummatoryValue(x=1, value=1, method="magic")

    def test_result_record_serializes_value_as_string(self):
        record = sm.result_record("d2", sm.SummatoryValue(10, 83, "mobius_weighted"), 1.5)
        assert record == {
            "x": 10,
            "function": "d2",
            "method": "mobius_weighted",
            "value": "83",
            "elapsed_ms": 1.5,
        }
        without = sm.result_record("d2", sm.SummatoryValue(10, 83, "mobius_weighted"))
        assert "elapsed_ms" not in without
