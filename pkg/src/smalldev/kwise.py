"""Moment linear programs for k-wise independent Bernoulli sums.

For ``S`` the sum of ``n`` k-wise independent Bernoulli(p) variables, the
largest possible ``Pr[S >= m]`` is the value of an LP over the law
``p_0..p_n`` of ``S`` whose first ``k`` moments are pinned to those of
``Bin(n, p)``. This module solves it exactly, checks the closed forms for
``k = 2, 3`` and their dual polynomials, and builds the matching
counterexample laws.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .distributions import DiscreteDistribution
from .exactnum import decimal_str, fraction_to_str, parse_fraction, to_fraction
from .poly import Polynomial


class ClosedFormRangeError(ValueError):
    """Parameters fall outside the region where a closed form is valid."""


class LPError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def stirling2(i: int, j: int) -> int:
    if i == j:
        return 1
    if j == 0 or j > i:
        return 0
    return j * stirling2(i - 1, j) + stirling2(i - 1, j - 1)


def falling(n: int, j: int) -> int:
    out = 1
    for t in range(j):
        out *= n - t
    return out


def binomial_moment(n: int, p, i: int) -> Fraction:
    """``E[Bin(n, p)^i]`` via ``sum_j S(i, j) n^(j) p^j``."""
    if i < 0:
        raise ValueError("moment order must be nonnegative")
    p = to_fraction(p)
    return sum((stirling2(i, j) * falling(n, j) * p ** j for j in range(i + 1)), Fraction(0))


def binomial_pmf(n: int, p) -> list:
    p = to_fraction(p)
    return [math.comb(n, r) * p ** r * (1 - p) ** (n - r) for r in range(n + 1)]


def threshold_m(n: int, p, delta) -> int:
    x = n * to_fraction(p) + to_fraction(delta)
    return math.ceil(x)


@dataclass(frozen=True)
class KwiseMomentLP:
    n: int
    k: int
    p: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p))
        object.__setattr__(self, "delta", to_fraction(self.delta))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 1 <= self.k <= self.n:
            raise ValueError("k must lie in [1, n]")
        if not 0 < self.p < 1:
            raise ValueError("p must lie strictly between 0 and 1")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def m(self) -> int:
        return threshold_m(self.n, self.p, self.delta)

    def moments(self) -> list:
        return [binomial_moment(self.n, self.p, i) for i in range(self.k + 1)]

    def matrix(self) -> list:
        return [[Fraction(r) ** i for r in range(self.n + 1)] for i in range(self.k + 1)]

    def objective(self) -> list:
        return [Fraction(1 if r >= self.m else 0) for r in range(self.n + 1)]

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "p": fraction_to_str(self.p),
                "delta": fraction_to_str(self.delta), "m": self.m}

    @classmethod
    def from_json(cls, data) -> "KwiseMomentLP":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["n"]), int(data["k"]), parse_fraction(data["p"]), parse_fraction(data["delta"]))


@dataclass
class LPSolution:
    status: str
    value: Fraction | None
    support: list
    duals: list = field(default_factory=list)
    source: str = "simplex"

    def probabilities(self, n: int) -> list:
        out = [Fraction(0)] * (n + 1)
        for r, pr in self.support:
            out[r] = pr
        return out

    def distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.support)

    def dual_polynomial(self) -> Polynomial:
        return Polynomial(self.duals)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "source": self.source,
            "value": None if self.value is None else fraction_to_str(self.value),
            "value_decimal": None if self.value is None else decimal_str(self.value),
            "support": [{"r": r, "prob": fraction_to_str(pr)} for r, pr in self.support],
            "duals": [fraction_to_str(y) for y in self.duals],
        }

    @classmethod
    def from_json(cls, data) -> "LPSolution":
        if isinstance(data, str):
            data = json.loads(data)
        value = None if data["value"] is None else parse_fraction(data["value"])
        support = [(int(a["r"]), parse_fraction(a["prob"])) for a in data["support"]]
        duals = [parse_fraction(y) for y in data.get("duals", [])]
        return cls(data["status"], value, support, duals, data.get("source", "simplex"))


def solve_linear(M: list, rhs: list) -> list:
    """Exact Gauss-Jordan solve of a square nonsingular system."""
    size = len(M)
    A = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(M, rhs)]
    for col in range(size):
        piv = next((r for r in range(col, size) if A[r][col] != 0), None)
        if piv is None:
            raise LPError("singular system")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(size):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[r][size] for r in range(size)]


def _pivot(T: list, basis: list, row: int, col: int):
    inv = 1 / T[row][col]
    T[row] = [v * inv for v in T[row]]
    for i in range(len(T)):
        if i != row and T[i][col] != 0:
            f = T[i][col]
            T[i] = [a - f * b for a, b in zip(T[i], T[row])]
    basis[row] = col


def _bland(T: list, basis: list, cost: list, allowed: int) -> str:
    """Maximise ``cost`` over the tableau; columns ``>= allowed`` never enter."""
    while True:
        entering = None
        for j in range(allowed):
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[b] * T[i][j] for i, b in enumerate(basis))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        best = None
        for i, row in enumerate(T):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[1], entering)


def linprog_exact(A: list, b: list, c: list):
    """Maximise ``c.x`` subject to ``A x = b``, ``x >= 0`` in exact arithmetic.

    Two-phase simplex with Bland's rule. Returns ``(status, x, value, y)``
    where ``y`` solves ``y B = c_B`` for the final basis ``B``; at an optimum
    ``y A >= c`` and ``b.y`` equals the primal value.
    """
    rows, cols = len(A), len(c)
    A = [list(map(Fraction, r)) for r in A]
    b = list(map(Fraction, b))
    flipped = [bi < 0 for bi in b]
    for i in range(rows):
        if flipped[i]:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
    T = [A[i] + [Fraction(1 if j == i else 0) for j in range(rows)] + [b[i]] for i in range(rows)]
    basis = [cols + i for i in range(rows)]
    phase1 = [Fraction(0)] * cols + [Fraction(-1)] * rows
    _bland(T, basis, phase1, cols + rows)
    if any(T[i][-1] != 0 for i, v in enumerate(basis) if v >= cols):
        return "infeasible", None, None, None
    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for i in range(rows):
        if basis[i] >= cols:
            j = next((j for j in range(cols) if T[i][j] != 0), None)
            if j is None:
                continue
            _pivot(T, basis, i, j)
        keep.append(i)
    T = [T[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = list(map(Fraction, c)) + [Fraction(0)] * rows
    status = _bland(T, basis, cost, cols)
    if status != "optimal":
        return status, None, None, None
    x = [Fraction(0)] * cols
    for i, v in enumerate(basis):
        x[v] = T[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    B = [[A[r][v] for v in basis] for r in keep]
    yk = solve_linear([list(col) for col in zip(*B)], [Fraction(c[v]) for v in basis])
    y = [Fraction(0)] * rows
    for r, val in zip(keep, yk):
        y[r] = -val if flipped[r] else val
    return "optimal", x, value, y


def simplex_solve(lp: KwiseMomentLP) -> LPSolution:
    status, x, value, y = linprog_exact(lp.matrix(), lp.moments(), lp.objective())
    if status != "optimal":
        # Bin(n, p) is always feasible and the objective is bounded by 1
        raise LPError(f"moment LP reported {status}")
    support = [(r, pr) for r, pr in enumerate(x) if pr != 0]
    return LPSolution("optimal", value, support, y, "simplex")


def _solve_on_support(n: int, p, nodes: list) -> list:
    k = len(nodes) - 1
    M = [[Fraction(r) ** i for r in nodes] for i in range(k + 1)]
    return solve_linear(M, [binomial_moment(n, p, i) for i in range(k + 1)])


def closed_form_k2(n: int, p, delta) -> LPSolution:
    """Optimal law on ``{0, m, n}`` with ``Z = p(n + m - np - 1 + p)/m``."""
    lp = KwiseMomentLP(n, 2, p, delta)
    p, m = lp.p, lp.m
    if m > n * p + 1 - p:
        raise ClosedFormRangeError(f"m = {m} > np + 1 - p = {n * p + 1 - p}")
    probs = {
        0: (1 - p) * (m - n * p + p) / m,
        m: p * (1 - p) * n * (n - 1) / (m * (n - m)),
        n: p * (n * p - m + 1 - p) / (n - m),
    }
    if probs != dict(zip((0, m, n), _solve_on_support(n, p, [0, m, n]))):
        raise AssertionError("k=2 closed-form probabilities fail the moment system")
    value = p * (n + m - n * p - 1 + p) / m
    if value != probs[m] + probs[n]:
        raise AssertionError("k=2 closed-form value disagrees with its support")
    return LPSolution("optimal", value, [(r, q) for r, q in sorted(probs.items()) if q != 0],
                      [], "closed-form-k2")


def closed_form_k3(n: int, p, delta) -> LPSolution:
    """Optimal law on ``{0, m, n-1, n}`` with ``Z = p((n-2)(1-p)^2 + m(2-p))/m``.

    Only ``Z`` has a printed general formula; the four probabilities come from
    the moment system on that support.
    """
    lp = KwiseMomentLP(n, 3, p, delta)
    p, m = lp.p, lp.m
    if m > n * p + 1 - 2 * p:
        raise ClosedFormRangeError(f"m = {m} > np + 1 - 2p = {n * p + 1 - 2 * p}")
    nodes = [0, m, n - 1, n]
    probs = _solve_on_support(n, p, nodes)
    value = p * ((n - 2) * (1 - p) ** 2 + m * (2 - p)) / m
    if value != sum(probs[1:]):
        raise AssertionError("k=3 closed-form value disagrees with its support")
    # The stated condition only forces p_{n-1} >= 0; p_n can still be negative,
    # and then the formula overstates the LP optimum.
    status = "optimal" if all(q >= 0 for q in probs) else "infeasible-support"
    return LPSolution(status, value, [(r, q) for r, q in zip(nodes, probs) if q != 0],
                      [], "closed-form-k3")


def closed_form(n: int, k: int, p, delta) -> LPSolution:
    if k == 2:
        return closed_form_k2(n, p, delta)
    if k == 3:
        return closed_form_k3(n, p, delta)
    raise ClosedFormRangeError(f"no closed form for k = {k}")


def interpolate(points: list) -> Polynomial:
    """Lagrange interpolation through ``(x, y)`` pairs."""
    total = Polynomial([0])
    for i, (xi, yi) in enumerate(points):
        term = Polynomial([to_fraction(yi)])
        for j, (xj, _) in enumerate(points):
            if j != i:
                term = term * Polynomial([-to_fraction(xj), 1]) * Polynomial([1 / (to_fraction(xi) - to_fraction(xj))])
        total = total + term
    return total


def printed_g(n: int, m: int, y=1) -> Polynomial:
    """The printed cubic with its stray factor ``y`` fixed to a value."""
    s = Fraction(1, n * (n - 1) * m)
    y = to_fraction(y)
    return Polynomial([0, s * (n * n + 2 * m * n - n - m) * y, -s * (2 * n + m - 1), s])


def expected_value(Q: Polynomial, n: int, p) -> Fraction:
    return sum((c * binomial_moment(n, p, i) for i, c in enumerate(Q.coeffs)), Fraction(0))


@dataclass
class DualCertificate:
    n: int
    k: int
    p: Fraction
    delta: Fraction
    m: int
    Q: Polynomial
    values: list
    violations: list
    value: Fraction
    primal_value: Fraction | None
    printed_matches: bool | None = None

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def gap(self):
        return None if self.primal_value is None else self.value - self.primal_value

    @property
    def holds(self) -> bool:
        return self.feasible and self.gap == 0

    def complementary_slackness(self, solution: LPSolution) -> list:
        """Support atoms where ``Q(r)`` differs from the objective coefficient."""
        return [r for r, _ in solution.support if self.Q(r) != (1 if r >= self.m else 0)]

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "p": fraction_to_str(self.p),
            "delta": fraction_to_str(self.delta), "m": self.m,
            "Q": self.Q.to_json(),
            "values": [fraction_to_str(v) for v in self.values],
            "violations": self.violations,
            "value": fraction_to_str(self.value),
            "primal_value": None if self.primal_value is None else fraction_to_str(self.primal_value),
            "duality_gap_zero": self.gap == 0,
            "printed_formula_matches": self.printed_matches,
            "holds": self.holds,
        }


def check_dual(Q: Polynomial, lp: KwiseMomentLP, primal_value=None) -> DualCertificate:
    m = lp.m
    values = [Q(i) for i in range(lp.n + 1)]
    violations = [i for i, v in enumerate(values) if v < (1 if i >= m else 0)]
    return DualCertificate(lp.n, lp.k, lp.p, lp.delta, m, Q, values, violations,
                           expected_value(Q, lp.n, lp.p), primal_value)


def dual_certificate(n: int, p, delta, k: int) -> DualCertificate:
    """The closed-form dual polynomial, checked at every integer in ``[0, n]``.

    For ``k = 3`` the cubic is rebuilt from ``g(0) = 0`` and
    ``g(m) = g(n-1) = g(n) = 1``; ``printed_matches`` records whether the
    printed formula (stray ``y`` read as 1) agrees with it.
    """
    primal = closed_form(n, k, p, delta)
    lp = KwiseMomentLP(n, k, p, delta)
    m = lp.m
    if k == 2:
        Q = Polynomial([0, Fraction(m + n, m * n), Fraction(-1, m * n)])
        cert = check_dual(Q, lp, primal.value)
    else:
        Q = interpolate([(0, 0), (m, 1), (n - 1, 1), (n, 1)])
        cert = check_dual(Q, lp, primal.value)
        cert.printed_matches = printed_g(n, m) == Q
    return cert


def counterexample(n: int, delta, k: int) -> dict:
    """Law of ``S/p`` for the extremal k-wise sums at ``p = 1/(delta + k - 1)``.

    Requires ``(n + delta) p`` to be an integer. The result carries the law,
    the probability of ``{S/p < n + delta}``, and the moment comparison with
    ``Bin(n, p)/p`` up to order ``k + 1``.
    """
    delta = to_fraction(delta)
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    if delta <= 0 or n < k:
        raise ValueError("need delta > 0 and n >= k")
    p = 1 / (delta + k - 1)
    mq = (n + delta) * p
    if mq.denominator != 1:
        raise ClosedFormRangeError(f"(n + delta)/(delta + {k - 1}) = {mq} is not an integer")
    m = int(mq)
    if k == 2:
        nodes = [0, m]
        probs = [delta / (n + delta), Fraction(n) / (n + delta)]
        claimed = delta / (n + delta)
    else:
        d = delta
        nodes = [0, m, n]
        probs = [(d + 1) ** 2 / ((d + 2) * (n + d)),
                 (d + 1) * n * (n - 1) / ((n + d) * (n + n * d - d)),
                 1 / ((d + 2) * (n + n * d - d))]
        claimed = (d + 1) ** 2 / ((d + 2) * (n + d))
    law = DiscreteDistribution([(Fraction(r) / p, q) for r, q in zip(nodes, probs)])
    target = [binomial_moment(n, p, i) / p ** i for i in range(k + 2)]
    got = [law.moment(i) for i in range(k + 2)]
    prob = law.prob_less(n + delta)
    return {
        "n": n, "delta": delta, "k": k, "p": p, "m": m,
        "distribution": law,
        "probability": prob,
        "claimed": claimed,
        "moments_match": got[:k + 1] == target[:k + 1],
        "next_moment_differs": got[k + 1] != target[k + 1],
        "moments": got,
        "binomial_moments": target,
        "holds": prob == claimed and got[:k + 1] == target[:k + 1],
    }


SWEEP_FIELDS = ["n", "k", "p", "delta", "m", "Z_exact", "Z_decimal", "closed_form_match",
                "duality_gap_zero", "slackness_ok"]


def sweep_instance(args) -> dict | None:
    n, k, p, delta = args
    if k > n:
        return None
    try:
        cf = closed_form(n, k, p, delta)
    except ClosedFormRangeError:
        return None
    lp = KwiseMomentLP(n, k, p, delta)
    sol = simplex_solve(lp)
    cert = dual_certificate(n, p, delta, k)
    return {
        "n": n, "k": k, "p": fraction_to_str(lp.p), "delta": fraction_to_str(lp.delta), "m": lp.m,
        "Z_exact": fraction_to_str(sol.value), "Z_decimal": decimal_str(sol.value),
        "closed_form_match": cf.status == "optimal" and sol.value == cf.value,
        "duality_gap_zero": cert.feasible and cert.value == sol.value,
        "slackness_ok": not cert.complementary_slackness(sol),
    }


DEFAULT_PS = [Fraction(1, 6), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)]
DEFAULT_DELTAS = [Fraction(1, 4), Fraction(1, 2), Fraction(1)]


def sweep(n_max: int = 12, ks=(2, 3), ps=None, deltas=None, workers: int = 1) -> list:
    """Three-way comparison on every valid grid instance; rows in grid order."""
    ps = DEFAULT_PS if ps is None else [to_fraction(p) for p in ps]
    deltas = DEFAULT_DELTAS if deltas is None else [to_fraction(d) for d in deltas]
    grid = [(n, k, p, d) for n in range(1, n_max + 1) for k in ks for p in ps for d in deltas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_instance, grid, chunksize=8))
    else:
        rows = [sweep_instance(g) for g in grid]
    return [r for r in rows if r is not None]


def sweep_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
