"""Exact scalars: rationals, a + b*sqrt(d) numbers, and rational intervals.

Rationals are plain :class:`fractions.Fraction` values. ``QuadExt`` adjoins
one square root of a squarefree integer (3 unless stated otherwise) and keeps
sign decisions exact. ``RationalInterval`` encloses the few transcendental
constants that show up (powers of e) between rational endpoints.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and strings like ``"3/4"`` or ``"0.68"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, str, _RationalABC)):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def fraction_to_str(x) -> str:
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s).strip())


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return ``(k, d)`` with ``n == k*k*d`` and ``d`` squarefree."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    k, d = 1, 1
    rest = n
    f = 2
    while f * f <= rest:
        e = 0
        while rest % f == 0:
            rest //= f
            e += 1
        k *= f ** (e // 2)
        if e % 2:
            d *= f
        f += 1
    return k, d * rest


class QuadExt:
    """The real number ``a + b*sqrt(d)`` with rational ``a``, ``b``.

    ``d`` is a squarefree integer > 1. Mixing values with different ``d``
    raises ``ValueError``; ints and Fractions promote automatically.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 3):
        object.__setattr__(self, "a", to_fraction(a))
        object.__setattr__(self, "b", to_fraction(b))
        object.__setattr__(self, "d", int(d))

    def __setattr__(self, name, value):
        raise AttributeError("QuadExt is immutable")

    @classmethod
    def sqrt(cls, d: int = 3) -> "QuadExt":
        return cls(0, 1, d)

    def _coerce(self, other):
        if isinstance(other, QuadExt):
            if other.d != self.d:
                raise ValueError(f"mixed radicands sqrt({self.d}) and sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadExt(other, 0, self.d)
        return NotImplemented

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """``(a + b√d)(a − b√d) = a² − d·b²``."""
        return self.a * self.a - self.d * self.b * self.b

    def sign(self) -> int:
        return quadext_sign(self)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a * o.a + self.d * self.b * o.b,
                       self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        return self * QuadExt(o.a / n, -o.b / n, self.d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return QuadExt(1, 0, self.d) / self ** (-k)
        result = QuadExt(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare QuadExt with {type(other).__name__}")
        return quadext_sign(self - o)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.d})"

    def to_json(self) -> dict:
        return {"a": fraction_to_str(self.a), "b": fraction_to_str(self.b), "d": self.d}


def quadext_sign(x: QuadExt) -> int:
    """Exact sign of ``a + b*sqrt(d)``: compare ``a²`` with ``d*b²``."""
    sa, sb = _sign(x.a), _sign(x.b)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    diff = x.a * x.a - x.d * x.b * x.b
    if diff > 0:
        return sa
    if diff < 0:
        return sb
    return 0


def sign(x) -> int:
    """Sign of a Fraction, int or QuadExt."""
    if isinstance(x, QuadExt):
        return quadext_sign(x)
    return _sign(x)


def sqrt_rational(c, d: int | None = None):
    """Exact square root of a nonnegative rational.

    Returns a Fraction when ``c`` is a perfect square, else a ``QuadExt``
    with zero rational part over the squarefree radicand of ``c``.
    """
    c = to_fraction(c)
    if c < 0:
        raise ValueError("square root of a negative rational")
    if c == 0:
        return Fraction(0)
    n = c.numerator * c.denominator
    k, rad = squarefree_decomposition(n)
    coef = Fraction(k, c.denominator)
    if rad == 1:
        return coef
    if d is not None and rad != d:
        raise ValueError(f"sqrt({c}) is not in Q(sqrt({d}))")
    return QuadExt(0, coef, rad)


def sqrt_bracket(d: int, width) -> tuple[Fraction, Fraction]:
    """Rational ``lo < sqrt(d) < hi`` with ``hi - lo <= width`` (d not square)."""
    width = to_fraction(width)
    scale = 1
    while Fraction(1, scale) > width:
        scale *= 10
    s = math.isqrt(d * scale * scale)
    lo, hi = Fraction(s, scale), Fraction(s + 1, scale)
    if lo * lo == d:
        raise ValueError(f"{d} is a perfect square")
    return lo, hi


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_fraction(self.lo))
        object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(x, x)

    @staticmethod
    def _lift(x) -> "RationalInterval":
        if isinstance(x, RationalInterval):
            return x
        return RationalInterval(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        if isinstance(x, RationalInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __add__(self, other):
        o = self._lift(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(ps), max(ps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        return self * RationalInterval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if k == 0:
            return RationalInterval(1, 1)
        a, b = self.lo ** k, self.hi ** k
        if k % 2 == 0 and self.lo <= 0 <= self.hi:
            return RationalInterval(0, max(a, b))
        return RationalInterval(min(a, b), max(a, b))

    def to_json(self) -> dict:
        return {"lo": fraction_to_str(self.lo), "hi": fraction_to_str(self.hi)}

    @classmethod
    def from_json(cls, data: dict) -> "RationalInterval":
        return cls(parse_fraction(data["lo"]), parse_fraction(data["hi"]))


def exp_enclosure(x, terms: int) -> RationalInterval:
    """Enclose ``e**x`` for rational ``x <= 0``.

    The argument is halved until ``|y| <= 1``; for such ``y`` the Taylor
    series alternates with decreasing terms, so ``e**y`` lies between the
    partial sums with ``terms`` and ``terms + 1`` terms. The bracket is then
    squared back up. Intervals are nested in ``terms``.
    """
    x = to_fraction(x)
    if x > 0:
        raise ValueError("exp_enclosure supports only x <= 0")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if x == 0:
        return RationalInterval(1, 1)
    halvings = 0
    y = x
    while y < -1:
        y /= 2
        halvings += 1
    term = Fraction(1)
    partial = Fraction(0)
    for j in range(terms):
        partial += term
        term = term * y / (j + 1)
    following = partial + term
    lo, hi = min(partial, following), max(partial, following)
    base = RationalInterval(max(lo, Fraction(0)), hi)
    return base ** (2 ** halvings)


def exp_enclosure_to_width(x, width, max_terms: int = 500) -> RationalInterval:
    """Smallest-``terms`` enclosure of ``e**x`` no wider than ``width``."""
    width = to_fraction(width)
    for terms in range(1, max_terms + 1):
        enc = exp_enclosure(x, terms)
        if enc.width <= width:
            return enc
    raise ValueError(f"width {width} not reached within {max_terms} terms")


def interval_strictly_greater(x: RationalInterval, c) -> bool:
    """True iff ``x.lo > c``; False only means "not certified"."""
    return x.lo > to_fraction(c)


def scalar_to_json(x):
    if isinstance(x, QuadExt):
        if x.b == 0:
            return fraction_to_str(x.a)
        return x.to_json()
    return fraction_to_str(x)


def scalar_from_json(data):
    if isinstance(data, dict):
        return QuadExt(parse_fraction(data["a"]), parse_fraction(data["b"]), int(data.get("d", 3)))
    return parse_fraction(data)


def decimal_str(x, digits: int = 12) -> str:
    """Decimal rendering of an exact scalar to ``digits`` significant digits."""
    if isinstance(x, QuadExt):
        return f"{float(x):.{digits}g}"
    x = to_fraction(x)
    with decimal.localcontext() as ctx:
        ctx.prec = digits + 10
        value = decimal.Decimal(x.numerator) / decimal.Decimal(x.denominator)
        return f"{value:.{digits}g}"
