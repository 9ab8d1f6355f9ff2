"""The moment LP for k-wise independent Bernoulli sums, closed forms and duals.

Run: python3 demos/03_kwise_lp.py
"""

from fractions import Fraction

from smalldev.kwise import (
    KwiseMomentLP,
    closed_form_k3,
    counterexample,
    dual_certificate,
    simplex_solve,
)

lp = KwiseMomentLP(10, 3, Fraction(1, 4), Fraction(1, 2))
sol = simplex_solve(lp)
print(f"n=10, k=3, p=1/4, delta=1/2: Z = {sol.value}, support {[(r, str(q)) for r, q in sol.support]}")
cert = dual_certificate(10, Fraction(1, 4), Fraction(1, 2), 3)
print("dual cubic:", cert.Q, "feasible:", cert.feasible, "E[g] =", cert.value)
print("printed cubic (stray factor read as 1) agrees:", cert.printed_matches)

for n, delta, k in ((9, 1, 2), (10, 2, 3)):
    res = counterexample(n, delta, k)
    print(f"k={k}, n={n}, delta={delta}: Pr = {res['probability']}, "
          f"moments match through {k}: {res['moments_match']}, differ at {k + 1}: {res['next_moment_differs']}")

# An instance inside the stated k = 3 range where the printed optimum is not attained.
bad = closed_form_k3(4, Fraction(1, 6), Fraction(1, 4))
print("n=4, p=1/6, delta=1/4: formula", bad.value, "status", bad.status,
      "LP optimum", simplex_solve(KwiseMomentLP(4, 3, Fraction(1, 6), Fraction(1, 4))).value)
