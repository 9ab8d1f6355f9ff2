"""Quartic dual certificates for one-sided moment bounds and their case checks.

``build_q(ell, r)`` gives the quartic ``Q`` with a double root at ``-ell``,
``Q(0) = 1`` and ``Q - 1`` having a double root at ``r``; ``Q`` dominates the
indicator of ``[0, inf)``, so ``Pr[X >= delta] <= E[Q(X - delta)]``. The
expectation depends only on the first four moments of a mean-zero ``X``, and
each :class:`MomentRegime` supplies worst-case values for the third and
fourth moments given the variance.

The theorem verifiers replay a schedule of ``(ell, r)`` choices over ranges
of the standard deviation ``sigma`` and certify each resulting bound
polynomial with Sturm sequences, plus the convexity/endpoint shortcut where
it applies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exactnum import QuadExt, fraction_to_str, scalar_to_json, sign, sqrt_bracket, sqrt_rational, to_fraction
from .poly import LE, Polynomial, SignCertificate, convex_endpoint_bound, shift, sturm_sign_on_interval

FIVE_SIXTHS = Fraction(5, 6)


class CertificationError(Exception):
    """A case of a theorem check failed; carries the failing sigma-interval."""

    def __init__(self, message, case=None, sigma_interval=None, witness=None):
        super().__init__(message)
        self.case = case
        self.sigma_interval = sigma_interval
        self.witness = witness


def _positive(x) -> bool:
    return sign(x) > 0


@dataclass(frozen=True)
class CertificatePolynomial:
    ell: object
    r: object
    poly: Polynomial

    @property
    def q(self) -> tuple:
        return tuple(self.poly.coeff(i) for i in range(5))


def build_q(ell, r) -> CertificatePolynomial:
    """Coefficients ``q0..q4`` of the dominating quartic for ``ell, r > 0``."""
    if not (_positive(ell) and _positive(r)):
        raise ValueError(f"need ell > 0 and r > 0, got ell={ell}, r={r}")
    if not isinstance(ell, QuadExt):
        ell = to_fraction(ell)
    if not isinstance(r, QuadExt):
        r = to_fraction(r)
    s3 = (ell + r) ** 3
    den = ell * ell * s3
    q1 = 2 * r * r * (2 * ell + r) / (ell * s3)
    q2 = r * (-8 * ell * ell - ell * r + r * r) / den
    q3 = (4 * ell * ell - 4 * ell * r - 2 * r * r) / den
    q4 = (3 * ell + r) / den
    return CertificatePolynomial(ell, r, Polynomial([Fraction(1), q1, q2, q3, q4]))


@dataclass
class DominationProof:
    ell: Fraction
    r: Fraction
    residual_zero: Polynomial
    residual_one: Polynomial
    quadratic_min: Fraction
    holds: bool

    def to_json(self) -> dict:
        return {
            "ell": fraction_to_str(self.ell), "r": fraction_to_str(self.r),
            "residual_zero": self.residual_zero.to_json(),
            "residual_one": self.residual_one.to_json(),
            "quadratic_min": fraction_to_str(self.quadratic_min),
            "holds": self.holds,
        }


def verify_domination(ell, r, builder: Callable = build_q) -> DominationProof:
    """Check ``Q >= 1[x >= 0]`` through two exact factorizations.

    ``ell²(ell+r)³ Q = (ell+x)² ((ell+r)³ - 2(ell²+3 ell r+r²) x + (3ell+r) x²)``
    and ``ell²(ell+r)³ (Q-1) = x (4ell² + 2ell r + (3ell+r) x)(x-r)²``; the
    quadratic factor's minimum ``(2ell⁴+4ell³r+ell²r²)/(3ell+r)`` must be
    nonnegative and the linear factor is positive for ``x >= 0``.
    """
    ell, r = to_fraction(ell), to_fraction(r)
    cert = builder(ell, r)
    Q = cert.poly
    x = Polynomial.x()
    scale = ell * ell * (ell + r) ** 3
    a = 3 * ell + r
    b = ell * ell + 3 * ell * r + r * r
    quad = Polynomial([(ell + r) ** 3, -2 * b, a])
    res0 = scale * Q - (x + ell) ** 2 * quad
    res1 = scale * (Q - 1) - x * Polynomial([4 * ell * ell + 2 * ell * r, a]) * (x - r) ** 2
    qmin = quad(b / a)
    closed = (2 * ell ** 4 + 4 * ell ** 3 * r + ell ** 2 * r ** 2) / a
    holds = res0.is_zero() and res1.is_zero() and qmin == closed and qmin >= 0
    return DominationProof(ell, r, res0, res1, qmin, holds)


@dataclass(frozen=True)
class MomentRegime:
    """Worst-case third/fourth moments of a mean-zero sum with variance σ².

    ``third`` is the multiple of σ² substituted for E[X³] (the coefficient
    multiplying E[X³] is negative, so the smallest allowed value is worst);
    ``fourth`` are the multiples of (σ⁴, σ³, σ²) bounding E[X⁴].
    """

    name: str
    third: Fraction
    fourth: tuple
    c: Fraction | None = None

    def third_moment(self, sigma):
        return self.third * sigma ** 2

    def fourth_moment(self, sigma):
        c4, c3, c2 = self.fourth
        return c4 * sigma ** 4 + c3 * sigma ** 3 + c2 * sigma ** 2

    def to_json(self) -> dict:
        out = {"name": self.name}
        if self.c is not None:
            out["c"] = fraction_to_str(self.c)
        return out


BOUNDED_UNIT = MomentRegime("BoundedUnit", Fraction(-1), (Fraction(3), Fraction(0), Fraction(1)))
NONNEG_THIRD = MomentRegime("NonnegThird", Fraction(0), (Fraction(3), Fraction(0), Fraction(1)))
NEG_THIRD_TWO_POINT = MomentRegime("NegThirdTwoPoint", Fraction(-1), (Fraction(3), Fraction(4), Fraction(1)))


def kurtosis(c) -> MomentRegime:
    c = to_fraction(c)
    return MomentRegime("Kurtosis", Fraction(0), (c, Fraction(0), Fraction(0)), c)


def expansion_coefficients(q: CertificatePolynomial, delta, check: bool = True) -> tuple:
    """``E[Q(X - delta)]`` for mean-zero X as ``(const, c2, c3, c4)``.

    The result multiplies ``(1, E[X²], E[X³], E[X⁴])``. With ``check`` the
    closed form is compared against the coefficients of ``shift(Q, delta)``.
    """
    q0, q1, q2, q3, q4 = q.q
    const = q0 - delta * q1 + delta ** 2 * q2 - delta ** 3 * q3 + delta ** 4 * q4
    c2 = q2 - 3 * delta * q3 + 6 * delta ** 2 * q4
    c3 = q3 - 4 * delta * q4
    out = (const, c2, c3, q4)
    if check:
        s = shift(q.poly, delta)
        if (s.coeff(0), s.coeff(2), s.coeff(3), s.coeff(4)) != out:
            raise AssertionError("expansion disagrees with the shifted polynomial")
    return out


def regime_bound(q: CertificatePolynomial, delta, regime: MomentRegime, sigma):
    """Worst-case upper bound on ``E[Q(X - delta)]`` under ``regime``."""
    if q.ell > q.r:
        raise ValueError("regime bounds need ell <= r")
    if sign(sigma) < 0:
        raise ValueError("sigma must be nonnegative")
    const, c2, c3, c4 = expansion_coefficients(q, delta, check=False)
    return const + c2 * sigma ** 2 + c3 * regime.third_moment(sigma) + c4 * regime.fourth_moment(sigma)


def scaled_bound_polynomial(lam, rho, delta, regime: MomentRegime,
                            builder: Callable = build_q) -> Polynomial:
    """Bound for ``ell = lam*sigma, r = rho*sigma`` as a polynomial in ``u = 1/sigma``.

    ``q_i`` is homogeneous of degree ``-i`` in ``(ell, r)``, so with the
    scaled coefficients ``h_i = q_i(lam, rho)`` every term of the bound is a
    monomial in ``u`` of degree at most four.
    """
    if lam > rho:
        raise ValueError("regime bounds need ell <= r")
    h = builder(lam, rho).q
    t = regime.third
    e4, e3, e2 = regime.fourth
    u = Polynomial.x()
    out = sum_((-delta) ** i * h[i] * u ** i for i in range(5))
    out = out + (h[2] - 3 * delta * h[3] * u + 6 * delta ** 2 * h[4] * u ** 2)
    out = out + t * (h[3] * u - 4 * delta * h[4] * u ** 2)
    out = out + h[4] * (e4 + e3 * u + e2 * u ** 2)
    return out


def fixed_bound_polynomial(ell, r, delta, regime: MomentRegime,
                           builder: Callable = build_q) -> Polynomial:
    """Bound for fixed ``(ell, r)`` as a polynomial in ``sigma``."""
    q = builder(ell, r)
    if q.ell > q.r:
        raise ValueError("regime bounds need ell <= r")
    const, c2, c3, c4 = expansion_coefficients(q, delta, check=False)
    e4, e3, e2 = regime.fourth
    return Polynomial([const, 0, c2 + c3 * regime.third + c4 * e2, c4 * e3, c4 * e4])


def sum_(items):
    total = Polynomial()
    for it in items:
        total = total + it
    return total


def split_radical(p: Polynomial) -> tuple[Polynomial, Polynomial, int | None]:
    """Write ``p = A + sqrt(d) * B`` with rational ``A``, ``B``."""
    d = None
    rat, irr = [], []
    for c in p.coeffs:
        if isinstance(c, QuadExt):
            if c.b != 0:
                if d is not None and c.d != d:
                    raise ValueError("mixed radicands")
                d = c.d
            rat.append(c.a)
            irr.append(c.b)
        else:
            rat.append(c)
            irr.append(Fraction(0))
    return Polynomial(rat), Polynomial(irr), d


@dataclass
class CaseCertificate:
    theorem: str
    label: str
    sigma_interval: tuple
    ell: str
    r: str
    variable: str
    bound_polynomial: Polynomial
    target: Fraction
    sturm: list
    convexity: SignCertificate | None = None
    spot_checks: int = 0
    holds: bool = True
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        lo, hi = self.sigma_interval
        return {
            "theorem": self.theorem,
            "label": self.label,
            "sigma_interval": [fraction_to_str(lo), "inf" if hi is None else fraction_to_str(hi)],
            "ell": self.ell,
            "r": self.r,
            "variable": self.variable,
            "bound_polynomial": self.bound_polynomial.to_json(),
            "target": fraction_to_str(self.target),
            "methods": ["sturm"] + (["endpoint-convexity"] if self.convexity else []),
            "sturm": [c.to_json() for c in self.sturm],
            "convexity": self.convexity.to_json() if self.convexity else None,
            "spot_checks": self.spot_checks,
            "holds": self.holds,
            "notes": {k: scalar_to_json(v) if not isinstance(v, (str, bool, int, list)) else v
                      for k, v in self.notes.items()},
        }


def _sigma_samples(lo, hi, count=25):
    if hi is None:
        return [lo + Fraction(j * j, 4) for j in range(count)]
    return [lo + (hi - lo) * Fraction(j, count - 1) for j in range(count)]


def _describe(coef, var="sigma") -> str:
    if isinstance(coef, QuadExt):
        if coef.a == 0 and coef.b == 1:
            return f"sqrt({coef.d})*{var}"
        return f"({coef})*{var}"
    return f"{coef}*{var}"


def _fail(theorem, label, lo, hi, witness, why):
    raise CertificationError(
        f"{theorem} case {label} failed on sigma in [{lo}, {'inf' if hi is None else hi}]: {why}",
        case=label, sigma_interval=(lo, hi), witness=witness)


def _finish_case(case: CaseCertificate, bound_at, lo, hi):
    """Cross-check Sturm, convexity and pointwise evaluation; raise on failure."""
    for cert in case.sturm:
        if not cert.holds:
            case.holds = False
            _fail(case.theorem, case.label, lo, hi, cert.witness, "Sturm certificate refutes the bound")
    if case.convexity is not None and not case.convexity.holds:
        case.holds = False
        _fail(case.theorem, case.label, lo, hi, case.convexity.witness,
              "convexity/endpoint certificate does not agree")
    checked = 0
    for s in _sigma_samples(lo, hi):
        if s == 0 and case.variable == "u":
            continue
        if bound_at(s) > case.target:
            case.holds = False
            _fail(case.theorem, case.label, lo, hi, {"sigma": str(s)}, "pointwise evaluation exceeds target")
        checked += 1
    case.spot_checks = checked
    return case


def scaled_case(theorem, label, lam, rho, delta, regime, sigma_lo, sigma_hi, *,
                convex=False, target=FIVE_SIXTHS, builder=build_q,
                sqrt_width=Fraction(1, 10 ** 15)) -> CaseCertificate:
    """Certify the bound for ``ell = lam*sigma, r = rho*sigma`` on a sigma range.

    ``sigma_hi=None`` means the range is unbounded; in ``u = 1/sigma`` it
    becomes ``[0, 1/sigma_lo]``. Coefficients involving ``sqrt(d)`` are split
    as ``A + sqrt(d) B``; since that is affine in ``sqrt(d)``, certifying
    ``A + s B`` at both ends of a rational bracket around ``sqrt(d)`` covers it.
    """
    sigma_lo = to_fraction(sigma_lo)
    sigma_hi = None if sigma_hi is None else to_fraction(sigma_hi)
    poly = scaled_bound_polynomial(lam, rho, delta, regime, builder)
    interval = (Fraction(0) if sigma_hi is None else 1 / sigma_hi, 1 / sigma_lo)
    rat, irr, d = split_radical(poly)
    notes = {}
    if d is None:
        sturm = [sturm_sign_on_interval(rat - target, interval, LE)]
    else:
        s_lo, s_hi = sqrt_bracket(d, sqrt_width)
        notes["sqrt_bracket"] = [fraction_to_str(s_lo), fraction_to_str(s_hi)]
        sturm = [sturm_sign_on_interval(rat + s * irr - target, interval, LE) for s in (s_lo, s_hi)]
    convexity = convex_endpoint_bound(poly.rational(), interval, target) if convex else None
    case = CaseCertificate(theorem, label, (sigma_lo, sigma_hi), _describe(lam), _describe(rho),
                           "u", poly, target, sturm, convexity, notes=notes)

    def bound_at(sigma):
        return regime_bound(builder(lam * sigma, rho * sigma), delta, regime, sigma)

    return _finish_case(case, bound_at, sigma_lo, sigma_hi)


def fixed_case(theorem, label, ell, r, delta, regime, sigma_lo, sigma_hi, *,
               target=FIVE_SIXTHS, builder=build_q) -> CaseCertificate:
    """Certify the bound for constant ``(ell, r)``; a polynomial in sigma."""
    sigma_lo, sigma_hi = to_fraction(sigma_lo), to_fraction(sigma_hi)
    poly = fixed_bound_polynomial(ell, r, delta, regime, builder)
    sturm = [sturm_sign_on_interval(poly.rational() - target, (sigma_lo, sigma_hi), LE)]
    case = CaseCertificate(theorem, label, (sigma_lo, sigma_hi), str(ell), str(r),
                           "sigma", poly, target, sturm)
    q = builder(ell, r)
    return _finish_case(case, lambda s: regime_bound(q, delta, regime, s), sigma_lo, sigma_hi)


def check_coverage(cases) -> bool:
    """True iff the union of the cases' sigma-intervals contains ``[0, inf)``."""
    spans = sorted(c.sigma_interval for c in cases)
    reach = Fraction(0)
    if not spans or spans[0][0] != 0:
        return False
    for lo, hi in spans:
        if lo > reach:
            return False
        if hi is None:
            return True
        reach = max(reach, hi)
    return False


def _require_coverage(theorem, cases):
    if not check_coverage(cases):
        raise CertificationError(f"{theorem}: sigma-intervals do not cover [0, inf)")
    return cases


SQRT3 = QuadExt.sqrt(3)


def verify_theorem_third(builder: Callable = build_q) -> list[CaseCertificate]:
    """Bounded mean-zero summands: ``Pr[X >= 1/3] <= 5/6`` for every sigma."""
    name = "theorem3"
    delta = Fraction(1, 3)
    reg = BOUNDED_UNIT
    cases = [
        scaled_case(name, "sqrt3", SQRT3, SQRT3, delta, reg, 3, None, builder=builder),
        scaled_case(name, "a=2", Fraction(2), Fraction(2), delta, reg, Fraction(3, 2), 3,
                    convex=True, builder=builder),
        scaled_case(name, "a=9/4", Fraction(9, 4), Fraction(9, 4), delta, reg, 1, Fraction(3, 2),
                    convex=True, builder=builder),
        scaled_case(name, "a=5/2", Fraction(5, 2), Fraction(5, 2), delta, reg, Fraction(1, 2), 1,
                    convex=True, builder=builder),
        fixed_case(name, "r=3/2", Fraction(3, 2), Fraction(3, 2), delta, reg, 0, Fraction(1, 2),
                   builder=builder),
    ]
    return _require_coverage(name, cases)


def verify_lemma_425(builder: Callable = build_q) -> list[CaseCertificate]:
    """Bounded summands with ``E[X³] >= 0``: ``Pr[X >= 4/25] <= 5/6``."""
    name = "lemma425"
    delta = Fraction(4, 25)
    reg = NONNEG_THIRD
    cases = [
        scaled_case(name, "sqrt3", SQRT3, SQRT3, delta, reg, Fraction(5, 4), None, builder=builder),
        scaled_case(name, "(2s,5s/2)", Fraction(2), Fraction(5, 2), delta, reg,
                    Fraction(17, 25), Fraction(5, 4), convex=True, builder=builder),
        scaled_case(name, "(15s/7,3s)", Fraction(15, 7), Fraction(3), delta, reg,
                    Fraction(1, 2), Fraction(17, 25), convex=True, builder=builder),
        fixed_case(name, "(1,2)", Fraction(1), Fraction(2), delta, reg, 0, Fraction(1, 2),
                   builder=builder),
    ]
    return _require_coverage(name, cases)


def verify_lemma_negthird(builder: Callable = build_q) -> list[CaseCertificate]:
    """Two-point summands, ``E[X³] <= 0``, ``a_1 >= 1/16``: ``Pr[X >= 1] <= 5/6``."""
    name = "lemma-negthird"
    delta = Fraction(1)
    reg = NEG_THIRD_TWO_POINT
    cases = [
        scaled_case(name, "sqrt3", SQRT3, SQRT3, delta, reg, 16, None, builder=builder),
        scaled_case(name, "r=19s/10", Fraction(19, 10), Fraction(19, 10), delta, reg,
                    Fraction(5, 2), 16, convex=True, builder=builder),
        fixed_case(name, "r=5", Fraction(5), Fraction(5), delta, reg, 0, Fraction(5, 2),
                   builder=builder),
    ]
    return _require_coverage(name, cases)


@dataclass
class Theorem2Certificate:
    c: Fraction
    bound: Fraction
    regime_value: object
    tight_example: object
    tight_probability: Fraction
    holds: bool

    def to_json(self) -> dict:
        return {
            "theorem": "theorem2",
            "c": fraction_to_str(self.c),
            "bound": fraction_to_str(self.bound),
            "regime_value": scalar_to_json(self.regime_value),
            "tight_example": self.tight_example.to_json(),
            "tight_probability": fraction_to_str(self.tight_probability),
            "holds": self.holds,
        }


def verify_theorem2(c, sigma=1) -> Theorem2Certificate:
    """``E[X³] >= 0`` and ``E[X⁴] <= c σ⁴`` give ``Pr[X >= 0] <= 1 - 1/(2c)``.

    The bound is reproduced exactly with ``ell = r = sqrt(c)*sigma``. The
    three-point law ``{-1, 0, 1}`` with mass ``1/(2c)`` on each of ``±1`` has
    kurtosis exactly ``c`` and attains the bound.
    """
    from .distributions import three_point_example

    c = to_fraction(c)
    if c < 1:
        raise ValueError("kurtosis bound c must be >= 1")
    sigma = to_fraction(sigma)
    root = sqrt_rational(c)
    q = build_q(root * sigma, root * sigma)
    value = regime_bound(q, 0, kurtosis(c), sigma)
    bound = 1 - 1 / (2 * c)
    dist = three_point_example(1 / (2 * c))
    prob = dist.prob_at_least(0)
    m2, m3, m4 = (dist.moment(i) for i in (2, 3, 4))
    holds = value == bound and prob == bound and m3 == 0 and m4 == c * m2 * m2
    return Theorem2Certificate(c, bound, value, dist, prob, holds)


def verify_beta(width=Fraction(1, 10 ** 12)):
    """Interval proof that ``(46/279) e^(-4/25) > 7/50``."""
    from .exactnum import exp_enclosure_to_width, interval_strictly_greater

    enc = exp_enclosure_to_width(Fraction(-4, 25), width * Fraction(279, 46))
    beta = Fraction(46, 279) * enc
    return {
        "exp_enclosure": enc.to_json(),
        "beta": beta.to_json(),
        "width": fraction_to_str(beta.width),
        "threshold": "7/50",
        "holds": interval_strictly_greater(beta, Fraction(7, 50)) and beta.width <= width,
    }


def cases_report(theorem: str, cases) -> dict:
    return {
        "theorem": theorem,
        "cases": [c.to_json() for c in cases],
        "coverage": check_coverage(cases),
        "holds": all(c.holds for c in cases) and check_coverage(cases),
    }


def cases_report_json(theorem: str, cases) -> str:
    return json.dumps(cases_report(theorem, cases), indent=2)
