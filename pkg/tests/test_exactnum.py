import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from smalldev.exactnum import (
    QuadExt,
    RationalInterval,
    decimal_str,
    exp_enclosure,
    exp_enclosure_to_width,
    fraction_to_str,
    interval_strictly_greater,
    parse_fraction,
    scalar_from_json,
    scalar_to_json,
    sign,
    sqrt_bracket,
    sqrt_rational,
    squarefree_decomposition,
)

small = st.fractions(min_value=-50, max_value=50, max_denominator=60)


def qe(a, b, d=3):
    return QuadExt(F(a), F(b), d)


class TestFractionText:
    def test_round_trip(self):
        for x in (F(0), F(-7, 3), F(5), F(1, 10 ** 20)):
            assert parse_fraction(fraction_to_str(x)) == x

    def test_always_has_denominator(self):
        assert fraction_to_str(F(3)) == "3/1"

    def test_decimal(self):
        assert decimal_str(F(1, 3)) == "0.333333333333"
        assert decimal_str(F(9, 10)) == "0.9"

    def test_squarefree(self):
        assert squarefree_decomposition(12) == (2, 3)
        assert squarefree_decomposition(10) == (1, 10)
        assert squarefree_decomposition(49) == (7, 1)


class TestQuadExt:
    def test_sqrt3_squared(self):
        s = QuadExt.sqrt()
        assert s * s == 3

    def test_inverse(self):
        x = qe(2, 1)
        assert x * (1 / x) == 1

    def test_examples(self):
        # (2+√3)(2-√3) = 1
        assert qe(2, 1) * qe(2, -1) == 1
        assert sign(qe(-2, 1)) == -1  # √3 < 2
        assert sign(qe(-7, 4)) == -1  # 4√3 = 6.93 < 7
        assert sign(qe(-6, 4)) == 1

    def test_zero_is_zero(self):
        assert sign(qe(0, 0)) == 0

    def test_mixing_radicands_rejected(self):
        with pytest.raises((ValueError, TypeError)):
            qe(1, 1, 3) + qe(1, 1, 2)

    @given(small, small, small, small)
    def test_field_ops_match_floats(self, a, b, c, d):
        x, y = qe(a, b), qe(c, d)
        r3 = math.sqrt(3)
        assert math.isclose(float(x * y), (a + b * r3) * (c + d * r3), rel_tol=1e-9, abs_tol=1e-9)
        assert (x + y) - y == x
        if y != 0:
            assert (x / y) * y == x

    @given(small, small)
    def test_sign_agrees_with_float_when_clear(self, a, b):
        v = float(a) + float(b) * math.sqrt(3)
        if abs(v) > 1e-9:
            assert sign(qe(a, b)) == (1 if v > 0 else -1)

    @given(small, small)
    def test_sign_via_norm(self, a, b):
        x = qe(a, b)
        # x * conj(x) is the norm; x > 0 and conj < 0 forces norm < 0
        assert x * x.conjugate() == x.norm()

    def test_json_round_trip(self):
        x = qe(F(1, 2), F(-3, 7))
        assert scalar_from_json(scalar_to_json(x)) == x
        assert scalar_from_json(scalar_to_json(F(5, 9))) == F(5, 9)


class TestSqrt:
    def test_perfect_square(self):
        assert sqrt_rational(F(9, 4)) == F(3, 2)

    def test_irrational(self):
        r = sqrt_rational(3)
        assert isinstance(r, QuadExt) and r * r == 3
        r = sqrt_rational(F(3, 2))
        assert r * r == F(3, 2)

    def test_bracket(self):
        lo, hi = sqrt_bracket(3, F(1, 10 ** 15))
        assert lo * lo < 3 < hi * hi
        assert hi - lo <= F(1, 10 ** 15)


class TestIntervals:
    def test_arithmetic_contains(self):
        a = RationalInterval(F(1), F(2))
        b = RationalInterval(F(-1), F(3))
        assert (a * b).lo == -2 and (a * b).hi == 6
        assert F(3, 2) in a

    def test_exp_zero(self):
        e = exp_enclosure(0, 5)
        assert e.lo == e.hi == 1

    def test_positive_rejected(self):
        with pytest.raises(ValueError):
            exp_enclosure(F(1, 2), 10)

    @pytest.mark.parametrize("x", [F(-1), F(-4, 25), F(-1, 3), F(-7), F(-25, 2)])
    def test_exp_contains_float(self, x):
        enc = exp_enclosure(x, 30)
        v = math.exp(float(x))
        assert float(enc.lo) <= v * (1 + 1e-12) and v <= float(enc.hi) * (1 + 1e-12)

    @given(st.fractions(min_value=-20, max_value=0, max_denominator=50), st.integers(1, 25))
    @settings(max_examples=60)
    def test_exp_nested(self, x, terms):
        outer, inner = exp_enclosure(x, terms), exp_enclosure(x, terms + 1)
        assert outer.lo <= inner.lo <= inner.hi <= outer.hi

    def test_exp_to_width(self):
        enc = exp_enclosure_to_width(F(-4, 25), F(1, 10 ** 12))
        assert enc.width <= F(1, 10 ** 12)

    def test_exp_minus_one_bounds(self):
        enc = exp_enclosure(-1, 40)
        assert F(367879, 10 ** 6) < enc.lo and enc.hi < F(367880, 10 ** 6)

    def test_strictly_greater(self):
        assert interval_strictly_greater(RationalInterval(F(1), F(2)), F(1, 2))
        assert not interval_strictly_greater(RationalInterval(F(1), F(2)), F(1))

    def test_interval_json(self):
        i = RationalInterval(F(-1, 3), F(5, 7))
        assert RationalInterval.from_json(i.to_json()) == i
