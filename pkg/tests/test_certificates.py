import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from smalldev.certificates import (
    BOUNDED_UNIT,
    NEG_THIRD_TWO_POINT,
    NONNEG_THIRD,
    SQRT3,
    CertificatePolynomial,
    CertificationError,
    build_q,
    check_coverage,
    expansion_coefficients,
    fixed_bound_polynomial,
    kurtosis,
    regime_bound,
    scaled_bound_polynomial,
    verify_beta,
    verify_domination,
    verify_lemma_425,
    verify_lemma_negthird,
    verify_theorem2,
    verify_theorem_third,
)
from smalldev.poly import Polynomial

pos = st.fractions(min_value=F(1, 40), max_value=10, max_denominator=40)


def negated_q2(ell, r):
    c = build_q(ell, r)
    q = list(c.q)
    q[2] = -q[2]
    return CertificatePolynomial(c.ell, c.r, Polynomial(q))


class TestBuildQ:
    def test_unit(self):
        # l = r = 1: q = (1, 3/4, -1, -1/4, 1/2)
        assert build_q(1, 1).q == (1, F(3, 4), F(-1), F(-1, 4), F(1, 2))

    def test_one_two(self):
        assert build_q(1, 2).q == (1, F(32, 27), F(-4, 9), F(-4, 9), F(5, 27))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            build_q(0, 1)
        with pytest.raises(ValueError):
            build_q(1, F(-1))

    def test_q3_vanishes_at_its_root(self):
        # 4l^2 - 4lr - 2r^2 = 0 at l = (1+√3)r/2
        r = F(3, 2)
        ell = (1 + SQRT3) * r / 2
        assert build_q(ell, r).q[3] == 0

    @given(pos, pos)
    @settings(max_examples=60)
    def test_conditions(self, ell, r):
        Q = build_q(ell, r).poly
        assert Q(-ell) == 0 and Q.derivative()(-ell) == 0
        assert Q(r) == 1 and Q.derivative()(r) == 0
        assert Q(0) == 1


class TestDomination:
    def test_unit_quadratic_min(self):
        proof = verify_domination(1, 1)
        assert proof.holds and proof.quadratic_min == F(7, 4)

    @given(pos, pos)
    @settings(max_examples=60)
    def test_random(self, ell, r):
        proof = verify_domination(ell, r)
        assert proof.holds
        assert proof.residual_zero.is_zero() and proof.residual_one.is_zero()

    def test_dominates_on_samples(self):
        rng = random.Random(7)
        for _ in range(20):
            ell = F(rng.randint(1, 40), rng.randint(1, 8))
            r = F(rng.randint(1, 40), rng.randint(1, 8))
            Q = build_q(ell, r).poly
            for i in range(-40, 41):
                x = F(i, 4)
                assert Q(x) >= (1 if x >= 0 else 0)

    def test_mutation_breaks_identity(self):
        assert not verify_domination(1, 2, builder=negated_q2).holds

    def test_quadext_coefficients(self):
        Q = build_q(SQRT3, SQRT3).poly
        assert Q(-SQRT3) == 0 and Q(SQRT3) == 1 and Q.derivative()(SQRT3) == 0


class TestExpansion:
    def test_matches_shift(self):
        q = build_q(1, 2)
        const, c2, c3, c4 = expansion_coefficients(q, F(1, 3))
        d = F(1, 3)
        qs = q.q
        assert const == sum(qs[i] * (-d) ** i for i in range(5))
        assert c2 == qs[2] - 3 * d * qs[3] + 6 * d * d * qs[4]
        assert c3 == qs[3] - 4 * d * qs[4]
        assert c4 == qs[4]

    def test_fixed_r_three_halves(self):
        # l = r = 3/2, delta = 1/3 under the bounded regime
        p = fixed_bound_polynomial(F(3, 2), F(3, 2), F(1, 3), BOUNDED_UNIT)
        assert p == Polynomial([F(10339, 13122), 0, 0, 0, F(8, 27)])

    def test_b2_coefficients(self):
        # B_2 in u = 1/sigma with l = r = 2 sigma
        p = scaled_bound_polynomial(2, 2, F(1, 3), BOUNDED_UNIT)
        assert p == Polynomial([F(27, 32), F(-1, 16), F(19, 288), F(1, 864), F(1, 2592)])

    def test_lemma4_fixed(self):
        p = fixed_bound_polynomial(5, 5, 1, NEG_THIRD_TWO_POINT)
        assert p == Polynomial([F(1016, 1250), 0, F(-29, 1250), F(4, 1250), F(3, 1250)])

    def test_lemma3_fixed(self):
        p = fixed_bound_polynomial(1, 2, F(4, 25), NONNEG_THIRD)
        assert p(0) == F(62573, 78125)

    def test_regime_rejects(self):
        q = build_q(2, 1)
        with pytest.raises(ValueError):
            regime_bound(q, F(1, 3), BOUNDED_UNIT, 1)
        with pytest.raises(ValueError):
            regime_bound(build_q(1, 2), F(1, 3), BOUNDED_UNIT, -1)

    def test_regime_moments(self):
        assert BOUNDED_UNIT.third_moment(2) == -4
        assert NEG_THIRD_TWO_POINT.fourth_moment(1) == 8
        assert kurtosis(3).fourth_moment(2) == 48


class TestTheorems:
    @pytest.mark.parametrize("verifier,count", [
        (verify_theorem_third, 5), (verify_lemma_425, 4), (verify_lemma_negthird, 3)])
    def test_cases(self, verifier, count):
        cases = verifier()
        assert len(cases) == count
        assert check_coverage(cases)
        for c in cases:
            assert c.holds
            assert all(s.holds and s.verify() for s in c.sturm)
            if c.convexity is not None:
                assert c.convexity.holds and c.convexity.verify()

    def test_convexity_where_argued(self):
        labels = {c.label: c.convexity is not None for c in verify_theorem_third()}
        assert sum(labels.values()) == 3

    @pytest.mark.parametrize("verifier", [verify_theorem_third, verify_lemma_425, verify_lemma_negthird])
    def test_mutation_is_caught(self, verifier):
        with pytest.raises(CertificationError):
            verifier(builder=negated_q2)

    def test_json(self):
        for c in verify_lemma_negthird():
            data = c.to_json()
            assert data["holds"] is True

    def test_coverage_detects_gap(self):
        cases = verify_theorem_third()
        assert not check_coverage(cases[1:])


class TestTheorem2:
    @pytest.mark.parametrize("c,bound", [(1, F(1, 2)), (F(3, 2), F(2, 3)), (2, F(3, 4)),
                                         (3, F(5, 6)), (10, F(19, 20))])
    def test_bound_and_tightness(self, c, bound):
        t = verify_theorem2(c)
        assert t.holds and t.bound == bound and t.tight_probability == bound

    def test_rejects_small_c(self):
        with pytest.raises(ValueError):
            verify_theorem2(F(1, 2))


class TestBeta:
    def test_beta(self):
        res = verify_beta()
        assert res["holds"]
        beta_lo = F(res["beta"]["lo"])
        assert beta_lo > F(7, 50)
        assert math.isclose(float(beta_lo), 46 / 279 * math.exp(-4 / 25), rel_tol=1e-11)
