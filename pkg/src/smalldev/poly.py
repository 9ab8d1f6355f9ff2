"""Dense univariate polynomials over exact scalars, with certified sign claims.

Coefficients are stored lowest degree first. Arithmetic is generic over any
field-like scalar (``Fraction`` or ``QuadExt``); Sturm sequences and the
sign certificates built on them require rational coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .exactnum import QuadExt, scalar_from_json, scalar_to_json, sign, to_fraction

LE = "<=0"
GE = ">=0"


def _is_zero(c) -> bool:
    return c == 0


def _scalar(c):
    if isinstance(c, QuadExt):
        return c
    return to_fraction(c)


class Polynomial:
    """Immutable polynomial ``sum(coeffs[i] * x**i)``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_scalar(c) for c in coeffs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def x(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @classmethod
    def from_roots(cls, roots, lead=1) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-_scalar(r), 1])
        return p

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    @property
    def is_rational(self) -> bool:
        return all(not isinstance(c, QuadExt) or c.b == 0 for c in self.coeffs)

    def rational(self) -> "Polynomial":
        """Same polynomial with QuadExt coefficients demoted to Fractions."""
        out = []
        for c in self.coeffs:
            if isinstance(c, QuadExt):
                if c.b != 0:
                    raise ValueError("polynomial has irrational coefficients")
                c = c.a
            out.append(c)
        return Polynomial(out)

    def __call__(self, x):
        return eval_poly(self, x)

    def __add__(self, other):
        o = _lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return Polynomial([self.coeff(i) + o.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        o = _lift(other)
        if self.is_zero() or o.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(o.coeffs):
                out[i + j] = a * b + out[i + j]
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Polynomial([1])
        for _ in range(k):
            result = result * self
        return result

    def __divmod__(self, other):
        o = _lift(other)
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(o.coeffs) + 1, 0)
        lead = o.leading
        for shift in range(len(rem) - len(o.coeffs), -1, -1):
            c = rem[shift + len(o.coeffs) - 1] / lead
            quot[shift] = c
            for j, b in enumerate(o.coeffs):
                rem[shift + j] = rem[shift + j] - c * b
        return Polynomial(quot), Polynomial(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        try:
            return self == _lift(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def shift(self, delta) -> "Polynomial":
        return shift(self, delta)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial([c / self.leading for c in self.coeffs])

    def __repr__(self):
        return f"Polynomial([{', '.join(str(c) for c in self.coeffs)}])"

    def to_json(self) -> list:
        return [scalar_to_json(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "Polynomial":
        return cls([scalar_from_json(c) for c in data])


def _lift(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, (int, Fraction, QuadExt)) and not isinstance(p, bool):
        return Polynomial([p])
    raise TypeError(f"cannot treat {type(p).__name__} as a polynomial")


def eval_poly(p: Polynomial, x):
    """Horner evaluation."""
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def shift(p: Polynomial, delta) -> Polynomial:
    """The polynomial ``x -> p(x - delta)``."""
    delta = _scalar(delta)
    n = len(p.coeffs)
    out = []
    for j in range(n):
        acc = Fraction(0)
        for i in range(j, n):
            acc = acc + p.coeffs[i] * comb(i, j) * (-delta) ** (i - j)
        out.append(acc)
    return Polynomial(out)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over the rationals."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: Polynomial) -> Polynomial:
    if p.degree <= 0:
        return p
    g = poly_gcd(p, p.derivative())
    return p // g


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    """Sturm chain ``p, p', -rem(p0, p1), ...``; rational coefficients only."""
    if not p.is_rational:
        raise ValueError("Sturm sequences need rational coefficients")
    p = p.rational()
    seq = [p]
    if p.degree <= 0:
        return seq
    seq.append(p.derivative())
    while True:
        r = -(seq[-2] % seq[-1])
        if r.is_zero():
            break
        seq.append(r)
    return seq


def sign_variations(seq: list[Polynomial], x) -> int:
    signs = [sign(q(x)) for q in seq]
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: Polynomial, a, b) -> int:
    """Number of distinct real roots of ``p`` in ``(a, b]``."""
    a, b = to_fraction(a), to_fraction(b)
    if a > b:
        raise ValueError("empty interval")
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    seq = sturm_sequence(squarefree_part(p.rational()))
    return sign_variations(seq, a) - sign_variations(seq, b)


@dataclass
class SignCertificate:
    """A claim ``p <= 0`` (or ``>= 0``) on ``[lo, hi]`` plus replayable evidence.

    ``method`` is ``"sturm"`` or ``"endpoint-convexity"``. For Sturm, each
    evidence piece is ``(a, b, roots_in_(a,b], [(x, sign(p(x))), ...])``; the
    pieces tile ``(lo, hi]`` and every open gap between consecutive roots
    carries at least one sample. For the convexity method the evidence holds
    the endpoint values and the convexity record.
    """

    polynomial: Polynomial
    interval: tuple
    claim: str
    method: str
    holds: bool
    evidence: dict = field(default_factory=dict)
    witness: dict | None = None

    def verify(self) -> bool:
        """Replay the evidence; True iff it reproduces ``holds``."""
        if self.method == "sturm":
            return _replay_sturm(self)
        if self.method == "endpoint-convexity":
            return _replay_convexity(self)
        raise ValueError(f"unknown method {self.method!r}")

    def to_json(self) -> dict:
        lo, hi = self.interval
        out = {
            "polynomial": self.polynomial.to_json(),
            "interval": [scalar_to_json(lo), scalar_to_json(hi)],
            "claim": self.claim,
            "method": self.method,
            "holds": self.holds,
        }
        if self.method == "sturm":
            out["pieces"] = [
                {"lo": scalar_to_json(a), "hi": scalar_to_json(b), "roots": n,
                 "samples": [[scalar_to_json(x), s] for x, s in samples]}
                for a, b, n, samples in self.evidence["pieces"]
            ]
        else:
            out["endpoint_values"] = [scalar_to_json(v) for v in self.evidence["endpoint_values"]]
            out["convexity"] = self.evidence["convexity"]
        if self.witness is not None:
            out["witness"] = {k: scalar_to_json(v) if not isinstance(v, (str, list)) else v
                              for k, v in self.witness.items()}
        return out


def _violates(s: int, claim: str) -> bool:
    return s > 0 if claim == LE else s < 0


def _isolate(p: Polynomial, g_seq, lo: Fraction, hi: Fraction, depth: int = 0):
    """Split ``(lo, hi]`` into pieces whose samples fix the sign of ``p``."""
    if depth > 200:
        raise RuntimeError("root isolation did not terminate")
    n = sign_variations(g_seq, lo) - sign_variations(g_seq, hi)
    if n == 0:
        mid = (lo + hi) / 2
        return [(lo, hi, 0, [(mid, sign(p(mid)))])]
    if n == 1:
        plo, phi = sign(p(lo)), sign(p(hi))
        if phi == 0:
            mid = (lo + hi) / 2
            return [(lo, hi, 1, [(mid, sign(p(mid))), (hi, 0)])]
        if plo != 0:
            return [(lo, hi, 1, [(lo, plo), (hi, phi)])]
    mid = (lo + hi) / 2
    return _isolate(p, g_seq, lo, mid, depth + 1) + _isolate(p, g_seq, mid, hi, depth + 1)


def sturm_sign_on_interval(p: Polynomial, interval, claim: str = LE) -> SignCertificate:
    """Certify ``p <= 0`` (claim ``"<=0"``) or ``p >= 0`` on a closed interval.

    Roots of the squarefree part are isolated by Sturm counts and bisection;
    ``p`` keeps one sign between consecutive roots, so one rational sample
    per gap decides the claim. A false claim comes back with
    ``holds=False`` and a witness point and subinterval.
    """
    if claim not in (LE, GE):
        raise ValueError(f"claim must be {LE!r} or {GE!r}")
    lo, hi = (to_fraction(v) for v in interval)
    if lo > hi:
        raise ValueError("empty interval")
    p = p.rational()
    if p.is_zero() or p.degree == 0 or lo == hi:
        s = sign(p(lo))
        pieces = [(lo, hi, 0, [(lo, s), (hi, sign(p(hi)))])]
    else:
        g_seq = sturm_sequence(squarefree_part(p))
        pieces = [(lo, lo, 0, [(lo, sign(p(lo)))])] + _isolate(p, g_seq, lo, hi)
    cert = SignCertificate(p, (lo, hi), claim, "sturm", True, {"pieces": pieces})
    for a, b, _, samples in pieces:
        for x, s in samples:
            if _violates(s, claim):
                cert.holds = False
                cert.witness = {"point": x, "value": p(x), "subinterval": [str(a), str(b)]}
                return cert
    return cert


def _replay_sturm(cert: SignCertificate) -> bool:
    p = cert.polynomial
    lo, hi = cert.interval
    pieces = cert.evidence["pieces"]
    if p.degree <= 0 or lo == hi:
        ok = all(sign(p(x)) == s for _, _, _, smp in pieces for x, s in smp)
        holds = all(not _violates(s, cert.claim) for _, _, _, smp in pieces for _, s in smp)
        return ok and holds == cert.holds
    g_seq = sturm_sequence(squarefree_part(p))
    first = pieces[0]
    if first[0] != lo or first[1] != lo:
        return False
    reach = lo
    holds = not _violates(sign(p(lo)), cert.claim)
    for a, b, n, samples in pieces[1:]:
        if a != reach or b <= a:
            return False
        reach = b
        if sign_variations(g_seq, a) - sign_variations(g_seq, b) != n:
            return False
        for x, s in samples:
            if not a <= x <= b or sign(p(x)) != s:
                return False
            holds = holds and not _violates(s, cert.claim)
        xs = sorted(x for x, _ in samples)
        if n == 0 and not any(a < x <= b for x in xs):
            return False
        if n == 1:
            straddled = a in xs and b in xs and p(a) != 0 and p(b) != 0
            root_at_end = p(b) == 0 and any(a < x < b for x in xs)
            if not (straddled or root_at_end):
                return False
        if n > 1:
            return False
    return reach == hi and holds == cert.holds


def convex_endpoint_bound(p: Polynomial, interval, bound) -> SignCertificate:
    """Certify ``p <= bound`` on ``[u1, u2]`` from convexity plus endpoints.

    Convexity comes from nonnegative coefficients of ``u**i`` for ``i >= 2``
    when ``u1 >= 0``; otherwise a Sturm certificate of ``p'' >= 0`` on the
    interval is required.
    """
    u1, u2 = (to_fraction(v) for v in interval)
    bound = to_fraction(bound)
    if u1 > u2:
        raise ValueError("empty interval")
    p = p.rational()
    q = p - bound
    convexity: dict
    if u1 >= 0 and all(c >= 0 for c in p.coeffs[2:]):
        convexity = {"method": "coefficients", "ok": True}
    else:
        second = sturm_sign_on_interval(p.derivative().derivative(), (u1, u2), GE)
        convexity = {"method": "sturm-second-derivative", "ok": second.holds}
    values = [q(u1), q(u2)]
    cert = SignCertificate(q, (u1, u2), LE, "endpoint-convexity", True,
                           {"endpoint_values": values, "convexity": convexity, "bound": bound})
    if not convexity["ok"]:
        cert.holds = False
        cert.witness = {"reason": "convexity not established"}
    elif values[0] > 0 or values[1] > 0:
        cert.holds = False
        x = u1 if values[0] > 0 else u2
        cert.witness = {"point": x, "value": q(x), "reason": "endpoint exceeds bound"}
    return cert


def _replay_convexity(cert: SignCertificate) -> bool:
    q = cert.polynomial
    u1, u2 = cert.interval
    values = [q(u1), q(u2)]
    if values != list(cert.evidence["endpoint_values"]):
        return False
    method = cert.evidence["convexity"]["method"]
    if method == "coefficients":
        convex = u1 >= 0 and all(c >= 0 for c in q.coeffs[2:])
    else:
        convex = sturm_sign_on_interval(q.derivative().derivative(), (u1, u2), GE).holds
    return (convex and values[0] <= 0 and values[1] <= 0) == cert.holds
