"""Build the dominating quartic, check it, and certify the bounded-summand bound.

Run: python3 demos/01_quartic_certificate.py
"""

from fractions import Fraction

from smalldev.certificates import (
    build_q,
    verify_beta,
    verify_domination,
    verify_theorem2,
    verify_theorem_third,
)

# Q(x) >= 1[x >= 0], touching 0 at -ell and 1 at r.
q = build_q(1, 2)
print("q coefficients for (ell, r) = (1, 2):", [str(c) for c in q.q])
proof = verify_domination(1, 2)
print("factorization residuals vanish:", proof.residual_zero.is_zero(), proof.residual_one.is_zero())
print("quadratic factor minimum:", proof.quadratic_min)

# Kurtosis bound and its tight three-point law.
for c in (Fraction(3, 2), Fraction(3)):
    t = verify_theorem2(c)
    print(f"c = {c}: bound {t.bound}, tight example gives {t.tight_probability}")

# Every sigma range of the bounded case, each with a replayable Sturm certificate.
for case in verify_theorem_third():
    lo, hi = case.sigma_interval
    extra = " + convexity" if case.convexity is not None else ""
    print(f"sigma in [{lo}, {hi if hi is not None else 'inf'}]: {case.label}, sturm{extra}, holds={case.holds}")

beta = verify_beta()
print("(46/279) e^(-4/25) > 7/50:", beta["holds"], "width", beta["width"])
