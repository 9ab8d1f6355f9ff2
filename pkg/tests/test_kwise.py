import itertools
import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from smalldev.kwise import (
    ClosedFormRangeError,
    KwiseMomentLP,
    LPSolution,
    binomial_moment,
    binomial_pmf,
    closed_form_k2,
    closed_form_k3,
    counterexample,
    dual_certificate,
    interpolate,
    linprog_exact,
    printed_g,
    simplex_solve,
    sweep,
    sweep_csv,
)


def enumerate_moment(n, p, i):
    """E[S^i] by summing over all 2^n outcomes."""
    total = F(0)
    for bits in itertools.product((0, 1), repeat=n):
        s = sum(bits)
        total += s ** i * math.prod(p if b else 1 - p for b in bits)
    return total


class TestBinomialMoment:
    def test_zero(self):
        assert binomial_moment(7, F(1, 3), 0) == 1

    def test_second(self):
        assert binomial_moment(9, F(1, 2), 2) == F(45, 2)

    def test_third_small(self):
        assert binomial_moment(2, F(1, 2), 3) == F(5, 2)

    @given(st.integers(1, 7), st.fractions(F(1, 9), F(8, 9), max_denominator=9), st.integers(0, 5))
    @settings(max_examples=40, deadline=None)
    def test_against_enumeration(self, n, p, i):
        assert binomial_moment(n, p, i) == enumerate_moment(n, p, i)


class TestLP:
    def test_rejects_degenerate_p(self):
        for p in (0, 1):
            with pytest.raises(ValueError):
                KwiseMomentLP(9, 2, p, 1)

    def test_m(self):
        assert KwiseMomentLP(9, 2, F(1, 2), F(1, 2)).m == 5
        # np + delta already an integer
        assert KwiseMomentLP(8, 2, F(1, 2), 1).m == 5

    def test_json(self):
        lp = KwiseMomentLP(10, 3, F(1, 4), F(1, 2))
        assert KwiseMomentLP.from_json(json.dumps(lp.to_json())) == lp

    def test_forced(self):
        sol = simplex_solve(KwiseMomentLP(1, 1, F(1, 2), F(1, 2)))
        assert sol.value == F(1, 2) and sol.support == [(0, F(1, 2)), (1, F(1, 2))]

    def test_k2(self):
        sol = simplex_solve(KwiseMomentLP(9, 2, F(1, 2), F(1, 2)))
        assert sol.value == F(9, 10)
        assert sol.support == [(0, F(1, 10)), (5, F(9, 10))]

    def test_k3(self):
        sol = simplex_solve(KwiseMomentLP(10, 3, F(1, 4), F(1, 2)))
        assert sol.value == F(13, 16)
        assert sol.support == [(0, F(3, 16)), (3, F(45, 56)), (10, F(1, 112))]

    def test_primal_feasible_and_dual_bound(self):
        lp = KwiseMomentLP(8, 3, F(1, 3), F(1, 4))
        sol = simplex_solve(lp)
        probs = sol.probabilities(lp.n)
        assert sum(probs) == 1 and all(x >= 0 for x in probs)
        for i, target in enumerate(lp.moments()):
            assert sum(r ** i * x for r, x in enumerate(probs)) == target
        Q = sol.dual_polynomial()
        assert all(Q(r) >= (1 if r >= lp.m else 0) for r in range(lp.n + 1))
        assert sum(y * b for y, b in zip(sol.duals, lp.moments())) == sol.value
        assert len(sol.support) <= lp.k + 2

    @pytest.mark.parametrize("n", range(1, 8))
    def test_full_independence_is_binomial(self, n):
        for p in (F(1, 3), F(1, 2)):
            lp = KwiseMomentLP(n, n, p, F(1, 2))
            assert simplex_solve(lp).value == sum(binomial_pmf(n, p)[lp.m:])

    def test_solution_json(self):
        sol = simplex_solve(KwiseMomentLP(9, 2, F(1, 2), F(1, 2)))
        assert LPSolution.from_json(json.dumps(sol.to_json())) == sol

    def test_generic_lp(self):
        # max x0 + x1 s.t. x0 + 2 x1 + x2 = 4, x0 - x1 + x3 = 1
        status, x, value, y = linprog_exact([[1, 2, 1, 0], [1, -1, 0, 1]], [4, 1], [1, 1, 0, 0])
        assert status == "optimal" and value == 3 and x[:2] == [2, 1]
        assert y[0] * 4 + y[1] * 1 == value

    def test_infeasible(self):
        status, *_ = linprog_exact([[1, 1]], [-1], [1, 1])
        assert status == "infeasible"

    def test_unbounded(self):
        status, *_ = linprog_exact([[1, -1]], [1], [1, 1])
        assert status == "unbounded"


class TestClosedForms:
    def test_k2_example(self):
        sol = closed_form_k2(9, F(1, 2), F(1, 2))
        assert sol.value == F(9, 10)
        assert dict(sol.support) == {0: F(1, 10), 5: F(9, 10)}

    @pytest.mark.parametrize("n,d", [(9, 1), (4, 2), (9, 3), (11, 1)])
    def test_k2_markov_case(self, n, d):
        p = F(1, d + 1)
        sol = closed_form_k2(n, p, d * p)
        assert sol.value == F(n, n + d)
        assert dict(sol.support).get(0) == F(d, n + d)

    def test_k2_out_of_range(self):
        with pytest.raises(ClosedFormRangeError):
            closed_form_k2(9, F(1, 2), 3)

    def test_k3_example(self):
        sol = closed_form_k3(10, F(1, 4), F(1, 2))
        assert sol.status == "optimal"
        assert dict(sol.support) == {0: F(3, 16), 3: F(45, 56), 10: F(1, 112)}
        assert sol.value == F(13, 16)

    def test_k3_out_of_range(self):
        with pytest.raises(ClosedFormRangeError):
            closed_form_k3(10, F(1, 2), 2)

    def test_k3_negative_atom_flagged(self):
        # inside the stated validity region, yet p_n < 0
        sol = closed_form_k3(4, F(1, 6), F(1, 4))
        assert sol.status == "infeasible-support"
        assert dict(sol.support)[4] == F(-1, 54)
        assert sol.value == F(29, 54)
        assert simplex_solve(KwiseMomentLP(4, 3, F(1, 6), F(1, 4))).value == F(14, 27)


class TestDual:
    def test_f(self):
        c = dual_certificate(9, F(1, 2), F(1, 2), 2)
        assert c.Q(0) == 0 and c.Q(5) == 1 and c.Q(9) == 1
        assert c.value == F(9, 10) and c.holds
        assert all(c.Q(i) >= 1 for i in range(5, 10))

    def test_g(self):
        c = dual_certificate(10, F(1, 4), F(1, 2), 3)
        assert [c.Q(x) for x in (0, 3, 9, 10)] == [0, 1, 1, 1]
        assert c.value == F(13, 16) and c.holds
        assert c.printed_matches

    @pytest.mark.parametrize("n,m", [(5, 2), (10, 3), (12, 4), (7, 1)])
    def test_printed_g_with_y_one(self, n, m):
        assert printed_g(n, m) == interpolate([(0, 0), (m, 1), (n - 1, 1), (n, 1)])

    def test_printed_g_other_y(self):
        assert printed_g(10, 3, y=2)(3) != 1

    def test_slackness(self):
        lp = KwiseMomentLP(10, 3, F(1, 4), F(1, 2))
        c = dual_certificate(10, F(1, 4), F(1, 2), 3)
        assert c.complementary_slackness(simplex_solve(lp)) == []

    def test_json(self):
        data = dual_certificate(9, F(1, 2), F(1, 2), 2).to_json()
        assert data["duality_gap_zero"] and data["holds"]


class TestCounterexample:
    @pytest.mark.parametrize("n,delta,k,prob", [(9, 1, 2, F(1, 10)), (4, 2, 2, F(1, 3)),
                                                (10, 2, 3, F(3, 16))])
    def test_probabilities(self, n, delta, k, prob):
        res = counterexample(n, delta, k)
        assert res["probability"] == prob == res["claimed"]
        assert res["moments_match"] and res["next_moment_differs"]

    def test_mean_one(self):
        res = counterexample(10, 2, 3)
        assert res["distribution"].mean == 10

    def test_divisibility(self):
        with pytest.raises(ClosedFormRangeError):
            counterexample(10, 1, 2)


class TestSweep:
    def test_rows_and_csv(self):
        rows = sweep(6, ks=(2,))
        assert rows and all(r["closed_form_match"] and r["duality_gap_zero"] for r in rows)
        header = sweep_csv(rows).splitlines()[0]
        assert header.startswith("n,k,p,delta,m,Z_exact,Z_decimal,closed_form_match,duality_gap_zero")

    def test_workers(self):
        assert sweep(7, workers=2) == sweep(7)
