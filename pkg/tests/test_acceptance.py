"""Acceptance criteria, one check per criterion.

Each check prints ``ACCEPTANCE <n> PASS|FAIL <seconds>s <detail>``. Run with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import os
import random
import sys
import time
from fractions import Fraction as F

import pytest

from smalldev.certificates import (
    BOUNDED_UNIT,
    NEG_THIRD_TWO_POINT,
    NONNEG_THIRD,
    check_coverage,
    fixed_bound_polynomial,
    scaled_bound_polynomial,
    verify_beta,
    verify_domination,
    verify_lemma_425,
    verify_lemma_negthird,
    verify_theorem2,
    verify_theorem_third,
)
from smalldev.distributions import (
    TwoPointVariable,
    brute_force_min_tail,
    check_regime,
    distribution_moments,
    exact_tail,
    feige_family,
    moments_of_sum,
    spike_example,
    sum_distribution,
)
from smalldev.kwise import counterexample, sweep
from smalldev.poly import Polynomial

SEED = 20240611
WORKERS = min(4, os.cpu_count() or 1)


def criterion_1():
    rng = random.Random(SEED)
    failures = []
    for _ in range(100):
        ell = F(rng.randint(1, 1000), rng.randint(1, 100))
        r = F(rng.randint(1, 1000), rng.randint(1, 100))
        ell, r = min(ell, 10), min(r, 10)
        proof = verify_domination(ell, r)
        if not (proof.holds and proof.residual_zero.is_zero() and proof.residual_one.is_zero()):
            failures.append((ell, r))
    return not failures, f"100 random (l, r), failures={failures[:3]}", 5


def criterion_2():
    out = []
    for c in (F(1), F(3, 2), F(2), F(3), F(10)):
        t = verify_theorem2(c)
        out.append(t.holds and t.bound == 1 - 1 / (2 * c) == t.tight_probability)
    c3 = verify_theorem2(3)
    ok = all(out) and c3.tight_probability == F(5, 6)
    return ok, f"c in {{1, 3/2, 2, 3, 10}}: {out}; c=3 tight prob {c3.tight_probability}", 1


def _reference_constants():
    d = F(4, 25)
    checks = {
        "B2": scaled_bound_polynomial(2, 2, F(1, 3), BOUNDED_UNIT)
        == Polynomial([F(27, 32), F(-1, 16), F(19, 288), F(1, 864), F(1, 2592)]),
        "lemma3 (2s,5s/2)": scaled_bound_polynomial(2, F(5, 2), d, NONNEG_THIRD)
        == Polynomial([F(835, 972), -226 * d / 729, (68 - 207 * d * d) / 2916,
                       11 * d ** 3 / 243, 17 * d ** 4 / 729]),
        "lemma3 (15s/7,3s)": scaled_bound_polynomial(F(15, 7), 3, d, NONNEG_THIRD)
        == Polynomial([F(256957, 291600), -10633 * d / 32400, (26411 - 128625 * d * d) / 1749600,
                       7889 * d ** 3 / 194400, 26411 * d ** 4 / 1749600]),
        "lemma3 (1,2)": fixed_bound_polynomial(1, 2, d, NONNEG_THIRD)
        == Polynomial([F(62573, 78125), 0, F(-59, 3375), 0, F(5, 9)]),
        "lemma4 19s/10": scaled_bound_polynomial(F(19, 10), F(19, 10), 1, NEG_THIRD_TWO_POINT)
        == Polynomial([F(c, 260642) for c in (218442, -24885, 37800, 9500, 10000)]),
        "lemma4 r=5": fixed_bound_polynomial(5, 5, 1, NEG_THIRD_TWO_POINT)
        == Polynomial([F(1016, 1250), 0, F(-29, 1250), F(4, 1250), F(3, 1250)]),
    }
    return checks


def criterion_3():
    counts, ok = {}, True
    for name, verifier, expected in (("theorem3", verify_theorem_third, 5),
                                     ("lemma425", verify_lemma_425, 4),
                                     ("lemma-negthird", verify_lemma_negthird, 3)):
        cases = verifier()
        counts[name] = len(cases)
        ok &= len(cases) == expected and check_coverage(cases)
        for c in cases:
            ok &= c.holds and bool(c.sturm) and all(s.holds and s.verify() for s in c.sturm)
            if c.convexity is not None:
                ok &= c.convexity.holds and c.convexity.verify()
    numbers = _reference_constants()
    ok &= all(numbers.values())
    return ok, f"cases {counts}; reference constants {numbers}", 30


def criterion_4():
    res = verify_beta(F(1, 10 ** 12))
    return res["holds"], f"beta in [{float(F(res['beta']['lo'])):.15f}, ...], width {res['width']}", 1


def criterion_5():
    rows = sweep(12, ks=(2, 3))
    bad = [r for r in rows if not (r["closed_form_match"] and r["duality_gap_zero"] and r["slackness_ok"])]
    detail = f"{len(rows)} instances in the stated validity regions, {len(bad)} mismatches"
    if bad:
        detail += ": " + "; ".join(f"n={r['n']} k={r['k']} p={r['p']} delta={r['delta']} LP={r['Z_exact']}"
                                   for r in bad)
    return not bad, detail, 60


def criterion_6():
    t2 = counterexample(9, 1, 2)
    t3 = counterexample(10, 2, 3)
    ok = (t2["probability"] == F(1, 10) and t3["probability"] == F(3, 16)
          and all(r["moments_match"] and r["next_moment_differs"] for r in (t2, t3)))
    return ok, f"k=2: {t2['probability']}, k=3: {t3['probability']}", 1


def criterion_7():
    rng = random.Random(SEED)
    bad = 0
    for _ in range(200):
        n = rng.randint(1, 5)
        vs = [TwoPointVariable.centered(F(rng.randint(1, 12), rng.randint(1, 6)),
                                        F(rng.randint(1, 12), rng.randint(1, 6))) for _ in range(n)]
        bad += moments_of_sum(vs) != distribution_moments(sum_distribution(vs))
    fam_ok = True
    for n in range(1, 11):
        for delta in (F(1, 4), F(1, 2), F(1), F(3)):
            vs, p = feige_family(n, delta, verify=False)
            fam_ok &= exact_tail(vs, n + delta) == (1 - 1 / (n + delta)) ** n
            vs, p = spike_example(n, delta)
            fam_ok &= exact_tail(vs, n + delta) == delta / (1 + delta)
    return bad == 0 and fam_ok, f"moment mismatches {bad}/200; families exact: {fam_ok}", 10


def criterion_8():
    lows = {}
    for n in range(1, 5):
        res = brute_force_min_tail(n, 1, workers=WORKERS)
        lows[n] = res.min_probability
    floor_ok = all(v >= F(7, 50) for v in lows.values())
    values = [F(1, 4), F(1, 2), F(3, 4), F(1)]
    points = [(a, b) for a in values for b in values]
    worst, regime_ok, families = F(0), True, 0
    for n in range(1, 5):
        for fam in itertools.combinations_with_replacement(points, n):
            vs = [TwoPointVariable.centered(a, b) for a, b in fam]
            regime_ok &= check_regime(vs, BOUNDED_UNIT).ok
            worst = max(worst, exact_tail(vs, F(1, 3), ">="))
            families += 1
    ok = floor_ok and regime_ok and worst <= F(5, 6)
    return ok, (f"min tails {{n: value}} = { {n: str(v) for n, v in lows.items()} } >= 7/50; "
                f"bounded families {families}, max Pr[X >= 1/3] = {worst}"), 300


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


def run_criterion(fn):
    start = time.perf_counter()
    ok, detail, limit = fn()
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < limit
    n = fn.__name__.split("_")[1]
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {elapsed:.2f}s (limit {limit}s) {detail}"
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_acceptance(fn, capsys):
    ok, line = run_criterion(fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(fn) for fn in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
