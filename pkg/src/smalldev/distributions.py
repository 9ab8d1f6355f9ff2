"""Finite distributions with exact rational atoms.

Covers the laws of independent sums (by convolution), moments of sums of
mean-zero two-point variables, the classical extremal examples for the
small-deviation problem, the support-reduction / merge / surplus-split
transformations applied to nonnegative two-point families, and an
exhaustive grid search used as an independent oracle.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .certificates import MomentRegime
from .exactnum import decimal_str, exp_enclosure, fraction_to_str, parse_fraction, to_fraction

DEFAULT_ATOM_BUDGET = 10 ** 6
BUDGET_ENV = "SMALLDEV_ATOM_BUDGET"


class BudgetExceeded(RuntimeError):
    pass


def atom_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_ATOM_BUDGET


@dataclass(frozen=True)
class DiscreteDistribution:
    """Atoms ``(value, probability)`` with strictly increasing values.

    Construction merges repeated values, drops zero-probability atoms and
    insists the probabilities add up to exactly one.
    """

    atoms: tuple

    def __init__(self, atoms):
        if isinstance(atoms, dict):
            atoms = atoms.items()
        merged: dict[Fraction, Fraction] = {}
        for v, p in atoms:
            v, p = to_fraction(v), to_fraction(p)
            if p < 0:
                raise ValueError(f"negative probability {p} at {v}")
            merged[v] = merged.get(v, Fraction(0)) + p
        clean = tuple(sorted((v, p) for v, p in merged.items() if p != 0))
        if sum(p for _, p in clean) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        object.__setattr__(self, "atoms", clean)

    @classmethod
    def point(cls, value) -> "DiscreteDistribution":
        return cls([(value, 1)])

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def support(self) -> list:
        return [v for v, _ in self.atoms]

    def moment(self, i: int) -> Fraction:
        return sum((p * v ** i for v, p in self.atoms), Fraction(0))

    @property
    def mean(self) -> Fraction:
        return self.moment(1)

    def prob_less(self, t) -> Fraction:
        t = to_fraction(t)
        return sum((p for v, p in self.atoms if v < t), Fraction(0))

    def prob_at_least(self, t) -> Fraction:
        return 1 - self.prob_less(t)

    def shift(self, c) -> "DiscreteDistribution":
        c = to_fraction(c)
        return DiscreteDistribution([(v + c, p) for v, p in self.atoms])

    def scale(self, c) -> "DiscreteDistribution":
        c = to_fraction(c)
        return DiscreteDistribution([(v * c, p) for v, p in self.atoms])

    def distribution(self) -> "DiscreteDistribution":
        return self

    def to_json(self) -> list:
        return [{"value": fraction_to_str(v), "prob": fraction_to_str(p)} for v, p in self.atoms]

    @classmethod
    def from_json(cls, data) -> "DiscreteDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        return cls([(parse_fraction(a["value"]), parse_fraction(a["prob"])) for a in data])


@dataclass(frozen=True)
class TwoPointVariable:
    """A variable on ``{low, high}`` with the given mean.

    Nonnegative form has ``low == 0``; centered form has mean zero and
    support ``{-a, b}``. ``low == high`` encodes a constant.
    """

    low: Fraction
    high: Fraction
    mean: Fraction

    def __post_init__(self):
        for name in ("low", "high", "mean"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if not self.low <= self.mean <= self.high:
            raise ValueError(f"mean {self.mean} outside support [{self.low}, {self.high}]")
        if self.low == self.high and self.mean != self.low:
            raise ValueError("constant variable with inconsistent mean")

    @classmethod
    def nonneg(cls, mu, c) -> "TwoPointVariable":
        """Support ``{0, c}`` and mean ``mu``; ``Pr[X = c] = mu / c``."""
        mu, c = to_fraction(mu), to_fraction(c)
        if not 0 < mu <= c:
            raise ValueError(f"need 0 < mu <= c, got mu={mu}, c={c}")
        return cls(Fraction(0), c, mu)

    @classmethod
    def centered(cls, a, b) -> "TwoPointVariable":
        """Support ``{-a, b}`` with mean zero."""
        a, b = to_fraction(a), to_fraction(b)
        if a <= 0 or b <= 0:
            raise ValueError("centered two-point variables need a, b > 0")
        return cls(-a, b, Fraction(0))

    @classmethod
    def constant(cls, value) -> "TwoPointVariable":
        return cls(value, value, value)

    @property
    def is_constant(self) -> bool:
        return self.low == self.high

    @property
    def p_high(self) -> Fraction:
        if self.is_constant:
            return Fraction(1)
        return (self.mean - self.low) / (self.high - self.low)

    @property
    def p_low(self) -> Fraction:
        return 1 - self.p_high

    @property
    def a(self) -> Fraction:
        return self.mean - self.low

    @property
    def b(self) -> Fraction:
        return self.high - self.mean

    @property
    def surplus(self) -> Fraction:
        return self.high - self.mean

    @property
    def c(self) -> Fraction:
        return self.high - self.low

    def centered_form(self) -> "TwoPointVariable":
        return TwoPointVariable(self.low - self.mean, self.high - self.mean, Fraction(0))

    def aligned(self) -> "TwoPointVariable":
        return TwoPointVariable(Fraction(0), self.high - self.low, self.mean - self.low)

    def distribution(self) -> DiscreteDistribution:
        if self.is_constant:
            return DiscreteDistribution.point(self.low)
        return DiscreteDistribution([(self.low, self.p_low), (self.high, self.p_high)])

    def moment(self, i: int) -> Fraction:
        return self.distribution().moment(i)


@dataclass(frozen=True)
class MomentVector:
    m0: Fraction
    m1: Fraction
    m2: Fraction
    m3: Fraction
    m4: Fraction

    @property
    def sigma2(self) -> Fraction:
        return self.m2

    def as_tuple(self) -> tuple:
        return (self.m0, self.m1, self.m2, self.m3, self.m4)


def moments_of_sum(variables) -> MomentVector:
    """Raw moments of a sum of mean-zero two-point variables.

    Only 4-wise independence is used: ``m4 = 3 m2² + sum(E[X_i⁴] - 3 E[X_i²]²)``.
    """
    m2 = m3 = extra = Fraction(0)
    for v in variables:
        if v.mean != 0:
            raise ValueError("moments_of_sum expects mean-zero variables")
        a, b = v.a, v.b
        var = a * b
        m2 += var
        m3 += var * (b - a)
        extra += var * (a * a - a * b + b * b) - 3 * var * var
    return MomentVector(Fraction(1), Fraction(0), m2, m3, 3 * m2 * m2 + extra)


def distribution_moments(dist: DiscreteDistribution) -> MomentVector:
    return MomentVector(*(dist.moment(i) for i in range(5)))


@dataclass
class RegimeCheck:
    ok: bool
    witness: str | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def _bounded(variables):
    for i, v in enumerate(variables):
        if max(v.a, v.b) > 1:
            return f"variable {i} has max(a, b) = {max(v.a, v.b)} > 1"
    return None


def check_regime(variables, regime: MomentRegime) -> RegimeCheck:
    """Check a family of centered two-point variables against a regime's hypotheses.

    Hypotheses are checked first; then the regime's moment inequalities are
    recomputed from the exact moments. A failed hypothesis or inequality is
    returned as the witness.
    """
    variables = list(variables)
    for v in variables:
        if v.mean != 0:
            return RegimeCheck(False, "variables must be centered (mean zero)")
    mv = moments_of_sum(variables)
    m2, m3, m4 = mv.m2, mv.m3, mv.m4
    details = {"m2": m2, "m3": m3, "m4": m4}
    name = regime.name
    if name in ("BoundedUnit", "NonnegThird"):
        why = _bounded(variables)
        if why:
            return RegimeCheck(False, why, details)
        if name == "NonnegThird" and m3 < 0:
            return RegimeCheck(False, f"m3 = {m3} < 0", details)
        if abs(m3) > m2:
            return RegimeCheck(False, f"|m3| = {abs(m3)} > m2 = {m2}", details)
        if m4 > 3 * m2 * m2 + m2:
            return RegimeCheck(False, f"m4 = {m4} > 3 m2^2 + m2", details)
        return RegimeCheck(True, None, details)
    if name == "NegThirdTwoPoint":
        if not variables:
            return RegimeCheck(True, None, details)
        for i, v in enumerate(variables):
            if v.a > 1:
                return RegimeCheck(False, f"a_{i} = {v.a} > 1", details)
        first = variables[0]
        if first.b != max(v.b for v in variables):
            return RegimeCheck(False, "b_1 is not the largest b_i", details)
        if first.a < Fraction(1, 16):
            return RegimeCheck(False, f"a_1 = {first.a} < 1/16", details)
        if m3 > 0:
            return RegimeCheck(False, f"m3 = {m3} > 0", details)
        sum_ab2 = sum(v.a * v.b ** 2 for v in variables)
        sum_a2b = sum(v.a ** 2 * v.b for v in variables)
        sum_ab3 = sum(v.a * v.b ** 3 for v in variables)
        details.update(sum_ab2=sum_ab2, sum_a2b=sum_a2b, sum_ab3=sum_ab3)
        if not sum_ab2 <= sum_a2b <= m2:
            return RegimeCheck(False, "chain sum a b^2 <= sum a^2 b <= sigma^2 broken", details)
        # b_1 <= 4 sqrt(sum a b^2), squared
        if first.b ** 2 > 16 * sum_ab2:
            return RegimeCheck(False, "b_1 > 4 sqrt(sum a b^2)", details)
        # sum a b^3 <= 4 sigma^3, squared (both sides nonnegative)
        if sum_ab3 ** 2 > 16 * m2 ** 3:
            return RegimeCheck(False, "sum a b^3 > 4 sigma^3", details)
        slack = m4 - 3 * m2 * m2 - m2
        if slack > 0 and slack ** 2 > 16 * m2 ** 3:
            return RegimeCheck(False, "m4 > 3 sigma^4 + 4 sigma^3 + sigma^2", details)
        if m3 < -m2:
            return RegimeCheck(False, f"m3 = {m3} < -m2", details)
        return RegimeCheck(True, None, details)
    if name == "Kurtosis":
        if m3 < 0:
            return RegimeCheck(False, f"m3 = {m3} < 0", details)
        if m4 > regime.c * m2 * m2:
            return RegimeCheck(False, f"m4 = {m4} > {regime.c} m2^2", details)
        return RegimeCheck(True, None, details)
    raise ValueError(f"unknown regime {name!r}")


def convolve(d1, d2, budget: int | None = None) -> DiscreteDistribution:
    """Law of the sum of two independent variables."""
    d1, d2 = d1.distribution(), d2.distribution()
    budget = atom_budget() if budget is None else budget
    if len(d1) * len(d2) > budget:
        raise BudgetExceeded(f"{len(d1)} x {len(d2)} atoms exceeds budget {budget}")
    out: dict[Fraction, Fraction] = {}
    for v1, p1 in d1.atoms:
        for v2, p2 in d2.atoms:
            v = v1 + v2
            out[v] = out.get(v, Fraction(0)) + p1 * p2
    return DiscreteDistribution(out)


def sum_distribution(variables, budget: int | None = None) -> DiscreteDistribution:
    total = DiscreteDistribution.point(0)
    for v in variables:
        total = convolve(total, v, budget)
    return total


def exact_tail(variables, threshold, side: str = "<", budget: int | None = None) -> Fraction:
    """``Pr[sum < threshold]`` (``side="<"``) or ``Pr[sum >= threshold]``."""
    dist = sum_distribution(variables, budget)
    if side == "<":
        return dist.prob_less(threshold)
    if side == ">=":
        return dist.prob_at_least(threshold)
    raise ValueError(f"side must be '<' or '>=', got {side!r}")


def feige_family(n: int, delta, verify: bool = True):
    """``n`` i.i.d. mean-one variables on ``{0, n + delta}``.

    Returns ``(variables, (1 - 1/(n+delta))**n)``; with ``verify`` the value
    is recomputed by convolution.
    """
    delta = to_fraction(delta)
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    c = n + delta
    variables = [TwoPointVariable.nonneg(1, c)] * n
    prob = (1 - 1 / c) ** n
    if verify:
        got = exact_tail(variables, n + delta, "<")
        if got != prob:
            raise AssertionError(f"convolution gives {got}, closed form {prob}")
    return variables, prob


def spike_example(n: int, delta):
    """One mean-one variable on ``{0, 1+delta}`` plus ``n-1`` constants equal to 1."""
    delta = to_fraction(delta)
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    variables = [TwoPointVariable.nonneg(1, 1 + delta)] + [TwoPointVariable.constant(1)] * (n - 1)
    return variables, exact_tail(variables, n + delta, "<")


def three_point_example(p, a=1) -> DiscreteDistribution:
    """``-a`` and ``a`` with probability ``p`` each, 0 otherwise (``p <= 1/2``)."""
    p, a = to_fraction(p), to_fraction(a)
    if not 0 < p <= Fraction(1, 2):
        raise ValueError("need 0 < p <= 1/2")
    return DiscreteDistribution([(-a, p), (0, 1 - 2 * p), (a, p)])


def _reduction_candidates(dist: DiscreteDistribution):
    mu = dist.mean
    for lo, hi in itertools.combinations(dist.support, 2):
        if lo < mu < hi:
            yield TwoPointVariable(lo, hi, mu)


def align_and_reduce(v, rest=(), delta=1, budget: int | None = None) -> TwoPointVariable:
    """Replace ``v`` by a mean-preserving two-point law, then shift it to ``{0, c}``.

    With more than two atoms, every law on a pair of atoms straddling the
    mean is a candidate, and the one minimising
    ``Pr[v' + sum(rest) < E[v'] + E[rest] + delta]`` wins (first pair in
    increasing order on ties). The original law is a mixture of these pairs
    and, when the mean is itself an atom, of the point mass there. If every
    pair does worse than the original law, the point mass is returned instead,
    so the probability never increases. Constants come back unshifted with
    ``is_constant`` set.
    """
    dist = v.distribution()
    if len(dist) == 1:
        return TwoPointVariable.constant(dist.support[0])
    if len(dist) == 2:
        lo, hi = dist.support
        return TwoPointVariable(lo, hi, dist.mean).aligned()
    rest = list(rest)
    threshold = dist.mean + sum((r.distribution().mean for r in rest), Fraction(0)) + to_fraction(delta)
    rest_dist = sum_distribution(rest, budget)
    best, best_tail = None, None
    for cand in _reduction_candidates(dist):
        tail = exact_tail([rest_dist, cand], threshold, "<", budget)
        if best_tail is None or tail < best_tail:
            best, best_tail = cand, tail
    original = exact_tail([rest_dist, dist], threshold, "<", budget)
    if best is None or best_tail > original:
        return TwoPointVariable.constant(dist.mean)
    return best.aligned()


def merge_pipeline(variables, t, delta=1, budget: int | None = None) -> list:
    """Merge the two smallest-mean variables while ``mu_i < t`` and ``mu_j <= 1 - t``.

    Each merge convolves the pair and passes the result through
    :func:`align_and_reduce` in the context of the remaining variables.
    A merge that reduces to a constant is dropped, since the target event
    is invariant under shifting one summand together with its mean.
    """
    t = to_fraction(t)
    if t > Fraction(1, 2):
        raise ValueError("threshold t must be <= 1/2")
    current = list(variables)
    if any(v.mean > 1 for v in current):
        raise ValueError("all means must be <= 1")
    while len(current) >= 2:
        current.sort(key=lambda v: v.mean)
        vi, vj = current[0], current[1]
        if not (vi.mean < t and vj.mean <= 1 - t):
            break
        rest = current[2:]
        merged = align_and_reduce(convolve(vi, vj, budget), rest, delta, budget)
        current = rest if merged.is_constant else rest + [merged]
    current.sort(key=lambda v: v.mean)
    return current


@dataclass
class SurplusSplit:
    tau: Fraction
    k: int
    m: Fraction
    head: list
    tail: list
    head_zero_probability: Fraction
    exp_bound: object
    head_certified: bool
    tail_certified: bool


def surplus_split(variables, tau=Fraction(25, 4), terms: int = 40) -> SurplusSplit:
    """Sort by surplus and split off the head whose surpluses dominate their means.

    ``k`` is the largest ``j`` with ``s_j >= tau * (mu_1 + ... + mu_j)``
    (0 if none). The head is all zero with probability at least
    ``exp(-1/tau)``; tail surpluses are at most ``tau * (m + 1)``.
    """
    tau = to_fraction(tau)
    ordered = sorted(variables, key=lambda v: -v.surplus)
    k = 0
    running = Fraction(0)
    for j, v in enumerate(ordered, start=1):
        running += v.mean
        if v.surplus >= tau * running:
            k = j
    head, tail = ordered[:k], ordered[k:]
    m = sum((v.mean for v in head), Fraction(0))
    zero = Fraction(1)
    for v in head:
        zero *= v.p_low
    enc = exp_enclosure(-1 / tau, terms)
    head_ok = k == 0 or zero >= enc.hi
    tail_ok = True
    if tail:
        cap = tau * (m + tail[0].mean)
        tail_ok = all(v.surplus <= cap for v in tail) and cap <= tau * (m + 1)
    return SurplusSplit(tau, k, m, head, tail, zero, enc, head_ok, tail_ok)


DEFAULT_MEANS = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
DEFAULT_SUPPORTS = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3),
                    Fraction(4), Fraction(6), Fraction(10)]
DEFAULT_MAX_FAMILIES = 200_000


def default_grid() -> dict:
    return {"mu": list(DEFAULT_MEANS), "c": list(DEFAULT_SUPPORTS)}


def grid_points(grid: dict) -> list:
    """``(mu, c)`` pairs with ``0 < mu <= 1`` and ``c >= mu``."""
    mus = grid.get("mu", DEFAULT_MEANS)
    cs = grid.get("c", DEFAULT_SUPPORTS)
    return [(to_fraction(m), to_fraction(c)) for m in mus for c in cs
            if 0 < to_fraction(m) <= 1 and to_fraction(c) >= to_fraction(m)]


def _family_tail(args):
    family, delta = args
    variables = [TwoPointVariable.nonneg(m, c) for m, c in family]
    threshold = sum((m for m, _ in family), Fraction(0)) + delta
    return exact_tail(variables, threshold, "<")


def _tail_chunk(args):
    families, delta = args
    return [_family_tail((f, delta)) for f in families]


@dataclass
class SearchResult:
    n: int
    delta: Fraction
    best_family: tuple
    min_probability: Fraction
    rows: list

    @property
    def best_variables(self) -> list:
        return [TwoPointVariable.nonneg(m, c) for m, c in self.best_family]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["family", "exact_tail", "decimal"])
        for fam, prob in self.rows:
            desc = ";".join(f"mu={fraction_to_str(m)},c={fraction_to_str(c)}" for m, c in fam)
            w.writerow([desc, fraction_to_str(prob), decimal_str(prob)])
        return buf.getvalue()


def brute_force_min_tail(n: int, delta, grid: dict | None = None, workers: int = 1,
                         max_families: int = DEFAULT_MAX_FAMILIES) -> SearchResult:
    """Minimise ``Pr[X < E[X] + delta]`` over all size-``n`` multisets of grid points.

    The minimum is an upper bound on the extremal constant. The family list is
    split into contiguous chunks, one per worker, and results are merged in
    enumeration order, so the output does not depend on ``workers``.
    """
    delta = to_fraction(delta)
    points = grid_points(grid or default_grid())
    families = list(itertools.combinations_with_replacement(points, n))
    if len(families) > max_families:
        raise BudgetExceeded(f"{len(families)} families exceeds budget {max_families}")
    if not families:
        raise ValueError("empty grid")
    if workers > 1 and len(families) > 1:
        size = -(-len(families) // workers)
        chunks = [families[i:i + size] for i in range(0, len(families), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            probs = [p for part in pool.map(_tail_chunk, [(c, delta) for c in chunks]) for p in part]
    else:
        probs = [_family_tail((f, delta)) for f in families]
    rows = list(zip(families, probs))
    best_family, best = min(rows, key=lambda row: row[1])
    return SearchResult(n, delta, best_family, best, rows)


def centered_grid_points(values=None) -> list:
    values = values or [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
    return [(to_fraction(a), to_fraction(b)) for a in values for b in values]


def bounded_upper_tail_max(n: int, delta=Fraction(1, 3), values=None):
    """Largest ``Pr[X >= delta]`` over size-``n`` families of ``{-a, b}``, ``a, b <= 1``."""
    delta = to_fraction(delta)
    best = None
    for fam in itertools.combinations_with_replacement(centered_grid_points(values), n):
        variables = [TwoPointVariable.centered(a, b) for a, b in fam]
        prob = exact_tail(variables, delta, ">=")
        if best is None or prob > best[1]:
            best = (fam, prob)
    return best
