"""Exact tails for the classical extremal families, then a brute-force search.

Run: python3 demos/02_extremal_examples.py
"""

from fractions import Fraction

from smalldev.distributions import (
    TwoPointVariable,
    brute_force_min_tail,
    feige_family,
    merge_pipeline,
    spike_example,
    surplus_split,
)
from smalldev.exactnum import decimal_str, exp_enclosure

for n in (1, 2, 10, 100):
    _, p = feige_family(n, 1)
    print(f"n = {n:>3}: Pr[S < n + 1] = {decimal_str(p)}")
print("1/e lies in", [decimal_str(x) for x in (exp_enclosure(-1, 40).lo, exp_enclosure(-1, 40).hi)])

_, p = spike_example(5, Fraction(1, 2))
print("one spike, delta = 1/2:", p)

vs = [TwoPointVariable.nonneg(Fraction(1, 10), 1), TwoPointVariable.nonneg(Fraction(1, 10), 1),
      TwoPointVariable.nonneg(Fraction(95, 100), 2)]
print("merge means:", [str(v.mean) for v in merge_pipeline(vs, Fraction(1, 2))])

split = surplus_split([TwoPointVariable.nonneg(1, 10), TwoPointVariable.nonneg(1, 6)])
print(f"surplus split: k = {split.k}, head zero-probability {split.head_zero_probability}")

for n in (1, 2, 3):
    res = brute_force_min_tail(n, 1)
    print(f"search n = {n}: min tail {res.min_probability} over {len(res.rows)} families")
