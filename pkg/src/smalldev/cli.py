"""Command-line front end: ``smalldev certify | lp | examples | search``.

Every command builds a :class:`Report` and prints it as JSON, CSV or text.
Exit status is 0 when the report is certified, 1 when falsified and 2 on
invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import certificates as cert
from . import distributions as dist
from . import kwise
from .exactnum import decimal_str, fraction_to_str, parse_fraction

CERTIFIED, FALSIFIED, ERROR = "certified", "falsified", "error"
EXIT_CODES = {CERTIFIED: 0, FALSIFIED: 1, ERROR: 2}
THEOREM1_FLOOR = Fraction(7, 50)


class InputError(ValueError):
    pass


@dataclass
class Report:
    command: str
    inputs: dict
    status: str
    payload: dict = field(default_factory=dict)
    timing: float = 0.0
    table: str | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "status": self.status,
                "payload": self.payload, "timing": self.timing, "table": self.table}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Report":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["command"], data["inputs"], data["status"], data.get("payload", {}),
                   data.get("timing", 0.0), data.get("table"))


def rational(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def show(x) -> dict:
    """Exact string next to a decimal approximation."""
    return {"exact": fraction_to_str(x), "decimal": decimal_str(x)}


def _status(ok: bool) -> str:
    return CERTIFIED if ok else FALSIFIED


# certify

def _cases(theorem, verifier):
    try:
        cases = verifier()
    except cert.CertificationError as exc:
        return {"theorem": theorem, "holds": False, "error": str(exc),
                "witness": repr(exc.witness)}
    return cert.cases_report(theorem, cases)


def _theorem2():
    out = []
    for c in (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(10)):
        out.append(cert.verify_theorem2(c).to_json())
    return {"theorem": "theorem2", "instances": out, "holds": all(r["holds"] for r in out)}


TARGETS = {
    "theorem2": _theorem2,
    "theorem3": lambda: _cases("theorem3", cert.verify_theorem_third),
    "lemma425": lambda: _cases("lemma425", cert.verify_lemma_425),
    "lemma-negthird": lambda: _cases("lemma-negthird", cert.verify_lemma_negthird),
    "beta": cert.verify_beta,
}


def cmd_certify(args) -> Report:
    names = list(TARGETS) if args.target == "all" else [args.target]
    results = {name: TARGETS[name]() for name in names}
    ok = all(r["holds"] for r in results.values())
    return Report("certify", {"target": args.target}, _status(ok), results)


# lp

def cmd_lp(args) -> Report:
    inputs = {k: (fraction_to_str(v) if isinstance(v, Fraction) else v)
              for k, v in vars(args).items() if k not in ("func", "format")}
    if args.sweep:
        rows = kwise.sweep(args.n_max, workers=args.workers)
        ok = all(r["closed_form_match"] and r["duality_gap_zero"] and r["slackness_ok"] for r in rows)
        bad = [r for r in rows if not (r["closed_form_match"] and r["duality_gap_zero"] and r["slackness_ok"])]
        return Report("lp", inputs, _status(ok), {"instances": len(rows), "mismatches": bad},
                      table=kwise.sweep_csv(rows))
    if None in (args.n, args.k, args.p, args.delta):
        raise InputError("lp needs N K P DELTA unless --sweep is given")
    try:
        lp = kwise.KwiseMomentLP(args.n, args.k, args.p, args.delta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    sol = kwise.simplex_solve(lp)
    payload = {"lp": lp.to_json(), "Z": show(sol.value), "solution": sol.to_json()}
    ok = True
    try:
        if args.closed_form:
            cf = kwise.closed_form(lp.n, lp.k, lp.p, lp.delta)
            match = cf.status == "optimal" and cf.value == sol.value
            payload["closed_form"] = cf.to_json() | {"match": match}
            ok &= match
        if args.dual:
            dc = kwise.dual_certificate(lp.n, lp.p, lp.delta, lp.k)
            gap_zero = dc.feasible and dc.value == sol.value
            payload["dual"] = dc.to_json() | {"gap_zero_vs_simplex": gap_zero,
                                              "slackness_violations": dc.complementary_slackness(sol)}
            ok &= gap_zero and not dc.complementary_slackness(sol)
    except kwise.ClosedFormRangeError as exc:
        raise InputError(str(exc)) from exc
    return Report("lp", inputs, _status(ok), payload)


# examples

def _write_distribution(law, path):
    data = law.to_json()
    if path:
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
    return data


def _default(value, fallback):
    return fallback if value is None else value


def cmd_examples(args) -> Report:
    fam = args.family
    inputs = {"family": fam, "n": args.n,
              "delta": None if args.delta is None else fraction_to_str(args.delta),
              "p": None if args.p is None else fraction_to_str(args.p)}
    try:
        if fam == "feige":
            n, delta = _default(args.n, 2), _default(args.delta, Fraction(1))
            variables, prob = dist.feige_family(n, delta)
            law = dist.sum_distribution(variables)
            ok = prob == law.prob_less(n + delta)
            extra = {"event": "sum < n + delta"}
        elif fam == "spike":
            delta = _default(args.delta, Fraction(1, 2))
            variables, prob = dist.spike_example(_default(args.n, 1), delta)
            law = dist.sum_distribution(variables)
            ok = prob == delta / (1 + delta)
            extra = {"event": "sum < n + delta", "claimed": fraction_to_str(delta / (1 + delta))}
        elif fam == "threepoint":
            p = _default(args.p, Fraction(1, 6))
            law = dist.three_point_example(p)
            prob = law.prob_at_least(0)
            ok = prob == 1 - p
            extra = {"event": "X >= 0", "kurtosis": fraction_to_str(law.moment(4) / law.moment(2) ** 2)}
        else:
            k = 2 if fam == "kwise2" else 3
            res = kwise.counterexample(_default(args.n, 9 if k == 2 else 10),
                                       _default(args.delta, Fraction(k - 1)), k)
            law, prob = res["distribution"], res["probability"]
            ok = res["holds"] and res["next_moment_differs"]
            extra = {"event": "S < n + delta", "p": fraction_to_str(res["p"]), "m": res["m"],
                     "moments_match": res["moments_match"],
                     "next_moment_differs": res["next_moment_differs"]}
    except (ValueError, kwise.ClosedFormRangeError) as exc:
        raise InputError(str(exc)) from exc
    payload = {"probability": show(prob), "distribution": _write_distribution(law, args.out)} | extra
    if args.out:
        payload["written_to"] = args.out
    return Report("examples", inputs, _status(ok), payload)


# search

def _range_values(text: str) -> list:
    text = text.strip()
    if ".." in text:
        bounds, _, step = text.partition("step")
        lo, hi = (parse_fraction(s) for s in bounds.split(".."))
        step = parse_fraction(step) if step.strip() else Fraction(1)
        if step <= 0:
            raise InputError("grid step must be positive")
        out, v = [], lo
        while v <= hi:
            out.append(v)
            v += step
        return out
    return [parse_fraction(s) for s in text.split(",") if s.strip()]


def parse_grid(text: str | None) -> dict:
    """``"c=1..10 step 1/4; mu=1/2,1"`` into a grid dict; unspecified keys use defaults."""
    grid = dist.default_grid()
    if not text:
        return grid
    for part in text.split(";"):
        if not part.strip():
            continue
        key, sep, values = part.partition("=")
        key = key.strip()
        if not sep or key not in ("c", "mu"):
            raise InputError(f"bad grid component {part!r}")
        try:
            grid[key] = _range_values(values)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad grid values {values!r}") from exc
    return grid


def cmd_search(args) -> Report:
    grid = parse_grid(" ".join(args.grid) if args.grid else None)
    inputs = {"n": args.n, "delta": fraction_to_str(args.delta), "workers": args.workers,
              "grid": {k: [fraction_to_str(v) for v in vs] for k, vs in grid.items()}}
    if args.n < 1 or args.delta <= 0:
        raise InputError("need n >= 1 and delta > 0")
    try:
        res = dist.brute_force_min_tail(args.n, args.delta, grid, args.workers, args.max_families)
    except dist.BudgetExceeded as exc:
        raise InputError(str(exc)) from exc
    best = [{"mu": fraction_to_str(m), "c": fraction_to_str(c)} for m, c in res.best_family]
    payload = {"families": len(res.rows), "min_probability": show(res.min_probability),
               "best_family": best, "floor": fraction_to_str(THEOREM1_FLOOR),
               "above_floor": res.min_probability >= THEOREM1_FLOOR}
    return Report("search", inputs, _status(res.min_probability >= THEOREM1_FLOOR), payload,
                  table=res.to_csv())


# output

def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.dumps()
    if fmt == "csv":
        if report.table:
            return report.table
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        rows = []
        _flatten("", {"status": report.status, **report.payload}, rows)
        w.writerows(rows)
        return buf.getvalue()
    lines = [f"{report.command}: {report.status} ({report.timing:.3f}s)"]
    rows = []
    _flatten("", report.payload, rows)
    lines += [f"  {k} = {v}" for k, v in rows if not k.startswith(("cases", "solution.support"))]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smalldev", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=["json", "csv", "text"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="run certificate verifiers")
    p.add_argument("target", choices=list(TARGETS) + ["all"])
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("lp", help="solve the k-wise moment LP exactly")
    p.add_argument("n", type=int, nargs="?")
    p.add_argument("k", type=int, nargs="?")
    p.add_argument("p", type=rational, nargs="?")
    p.add_argument("delta", type=rational, nargs="?")
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("--dual", action="store_true")
    p.add_argument("--sweep", action="store_true", help="three-way check over the default grid")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("examples", help="build an extremal example distribution")
    p.add_argument("family", choices=["feige", "spike", "threepoint", "kwise2", "kwise3"])
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=rational)
    p.add_argument("--p", type=rational)
    p.add_argument("--out", help="write the distribution JSON here")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("search", help="exhaustive grid search for the smallest tail")
    p.add_argument("n", type=int)
    p.add_argument("delta", type=rational)
    p.add_argument("--grid", nargs="+", help='e.g. "c=1..10 step 1/4; mu=1/2,1"')
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-families", type=int, default=dist.DEFAULT_MAX_FAMILIES)
    p.set_defaults(func=cmd_search)
    return parser


def _execute(argv) -> tuple[Report, str]:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report = args.func(args)
    except InputError as exc:
        report = Report(args.command, {"argv": list(sys.argv[1:] if argv is None else argv)},
                        ERROR, {"error": str(exc)})
    report.timing = round(time.perf_counter() - start, 6)
    return report, args.format


def run(argv=None) -> Report:
    """Parse and execute; invalid input yields an ``error`` report."""
    return _execute(argv)[0]


def main(argv=None) -> int:
    report, fmt = _execute(argv)
    out = sys.stdout if report.status != ERROR else sys.stderr
    print(render(report, fmt), file=out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
