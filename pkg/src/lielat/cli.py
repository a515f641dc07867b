"""Command line: compute indices and orders, cross-check identities, dump lattices, write tables.

Exit codes: 0 success or agreement, 1 operational error, 2 verified
mismatch, 3 precondition violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import counting, endo, lattice, ssindex
from .ring import BudgetExceeded, RingError, default_budget, make_ring, parse_ring

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH, EXIT_PRECONDITION = 0, 1, 2, 3


class CliError(Exception):
    """Operational failure, exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# -- output -------------------------------------------------------------------

def _emit(records, fmt, out=None, text_lines=None):
    stream = open(out, "w", newline="") if out else sys.stdout
    try:
        if fmt == "json":
            json.dump(records, stream, indent=2)
            stream.write("\n")
        elif fmt == "csv":
            if records:
                cols = list(records[0].keys())
                w = csv.DictWriter(stream, fieldnames=cols, extrasaction="ignore")
                w.writeheader()
                for r in records:
                    w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                                for k, v in r.items()})
        else:
            for line in (text_lines if text_lines is not None else
                         [" ".join(f"{k}={v}" for k, v in r.items()) for r in records]):
                stream.write(line + "\n")
    finally:
        if out:
            stream.close()


def _ring_from(args):
    if getattr(args, "ring", None):
        return parse_ring(args.ring)
    poly = [int(c) for c in args.poly.split(",")] if getattr(args, "poly", None) else None
    return make_ring(args.p, e=args.e, f=args.f, m=args.m, defining_data=poly)


def _budget(args):
    return args.budget if args.budget is not None else default_budget()


def _fmt(args):
    if args.format:
        return args.format
    out = getattr(args, "out", None)
    if out and out.endswith(".json"):
        return "json"
    if out and out.endswith(".csv"):
        return "csv"
    return "text"


# -- index --------------------------------------------------------------------

def _index_record(family, l, p, e, f, k, m, level, of="group"):
    query = ssindex.IndexQuery(family, l, k, m, level, of)
    return ssindex.evaluate(query, ssindex.FieldParams(p, e, f))


def run_index(args) -> int:
    rec = _index_record(args.family, args.l, args.p, args.e, args.f, args.k, args.m,
                        args.level, args.of)
    data = rec.to_json()
    if rec.preconditions:
        for v in rec.preconditions:
            print(f"precondition violated: {v}")
        if _fmt(args) != "text":
            _emit([data], _fmt(args), args.out)
        return EXIT_PRECONDITION
    _emit([data], _fmt(args), args.out, [data["value"]])
    return EXIT_OK


# -- order / verify order -----------------------------------------------------

_METHODS = {"formula": "formula", "orbit": "orbit_recursion", "brute": "brute_force"}


def _order(method, group, n, ring, budget):
    if method == "formula":
        return counting.formula_order(group, n, ring.q, ring.m, ring)
    if method == "orbit":
        return counting.orbit_count(group, n, ring)
    if method == "brute":
        return counting.brute_count(group, n, ring, budget)
    raise CliError(f"unknown method {method!r}")


def _method_key(name):
    for k, v in _METHODS.items():
        if name in (k, v):
            return k
    raise CliError(f"unknown method {name!r}")


def run_order(args) -> int:
    ring = _ring_from(args)
    res = _order(_method_key(args.method), args.group, args.n, ring, _budget(args))
    data = res.to_json()
    _emit([data], _fmt(args), args.out, [data["value"]])
    return EXIT_OK


def run_verify_order(args) -> int:
    ring = _ring_from(args)
    methods = [_method_key(s.strip()) for s in args.methods.split(",") if s.strip()]
    results = [_order(mth, args.group, args.n, ring, _budget(args)) for mth in methods]
    records = [r.to_json() for r in results]
    values = {r.value for r in results}
    lines = [f"{r.method}: {r.value}" for r in results]
    agree = len(values) == 1
    lines.append("agree" if agree else "MISMATCH")
    _emit(records, _fmt(args), args.out, lines)
    return EXIT_OK if agree else EXIT_MISMATCH


# -- verify escape / structure ------------------------------------------------

def run_verify_escape(args) -> int:
    lat = lattice.build_family(args.family, args.n)
    poly = [int(c) for c in args.poly.split(",")] if args.poly else None
    rep = endo.escape_sweep(lat, args.p, args.m, args.k, e=args.e, f=args.f,
                            precision=args.precision, budget=_budget(args), defining_data=poly)
    data = rep.to_json()
    lines = [f"{lat.family}_{lat.n} p={args.p} m={args.m} k={args.k} N={rep.precision}: "
             f"{rep.cosets} cosets, cases {dict(sorted(rep.by_case.items()))}, "
             f"failures {rep.failures}",
             "all cosets escape" if rep.ok else "ESCAPE FAILED"]
    _emit([data], _fmt(args), args.out, lines)
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def _structure_record(family, n, p, e=1, f=1):
    lat = lattice.build_family(family, n)
    rep = lattice.verify_structure(lat)
    powerful = lattice.is_powerful(lat, e, 1, p=p, e=e)
    return {"structure": family, "n": n, "p": p, "e": e, "f": f,
            "properties": {name: r.passed for name, r in rep.results.items()},
            "powerful_at_m_e": powerful,
            "passed": rep.passed and powerful}, rep, powerful


def run_verify_structure(args) -> int:
    data, rep, powerful = _structure_record(args.family, args.n, args.p, args.e, args.f)
    lines = list(rep.lines()) + [f"powerful at m = e: {'pass' if powerful else 'FAIL'}"]
    _emit([data], _fmt(args), args.out, lines)
    return EXIT_OK if data["passed"] else EXIT_MISMATCH


# -- lattice dump -------------------------------------------------------------

def run_lattice(args) -> int:
    lat = lattice.build_family(args.family, args.n)
    data = lat.to_json()
    if args.k:
        w = endo.diag_weights(lat, args.k)
        data["weights"] = dict(w.weights)
    fmt = _fmt(args)
    if fmt == "csv":
        rows = [{"i": i, "j": j, "k": k, "c": str(c)} for i, j, k, c in data["structure_constants"]]
        _emit(rows, "csv", args.out)
    elif fmt == "json":
        _emit([data], "json", args.out)
    else:
        lines = [f"{lat.family}_{lat.n}: rank {lat.rank}, dimension {lat.dim}"]
        for lab, g in zip(lat.labels, lat.grades):
            extra = f" w={data['weights'][lab]}" if "weights" in data else ""
            lines.append(f"  {lab}: {list(g)}{extra}")
        _emit([], "text", args.out, lines)
    return EXIT_OK


# -- tables -------------------------------------------------------------------

def _thmD_row(group, n, p, m, methods, budget):
    ring = make_ring(p, m=m)
    row = {"group": group, "n": n, "p": p, "e": 1, "f": 1, "m": m}
    vals = []
    for mth in methods:
        try:
            v = _order(mth, group, n, ring, budget).value
            row[mth] = str(v)
            vals.append(v)
        except BudgetExceeded:
            row[mth] = "over_budget"
    row["agree"] = len(set(vals)) <= 1
    return row


def _thmD_rows(p, n_max, m_max, methods, budget):
    return [_thmD_row(group, n, p, m, methods, budget)
            for group in ("O", "SO") for n in range(1, n_max + 1) for m in range(1, m_max + 1)]


def _thmA_rows(p, l_max, k_max, m_max, e=1, f=1):
    rows = []
    for fam in ssindex.FAMILIES:
        for l in range(1, l_max + 1):
            for level in ("full_group", "congruence_group", "lattice"):
                for k in range(1, k_max + 1):
                    m_lo = 0 if level == "lattice" else e
                    for m in range(m_lo, max(m_max, m_lo) + 1):
                        rows.append(_index_record(fam, l, p, e, f, k, m, level).to_json())
    return rows


def _cn_rows(qs, n_max):
    rows = []
    for q in qs:
        for n in range(1, n_max + 1):
            rec = counting.cn_recursive(n, q)
            closed = counting.cn_closed(n, q)
            row = {"n": n, "q": q, "c_recursive": str(rec), "c_closed": str(closed),
                   "C_n": str(counting.formula_Cn(n, q, 1)) if n >= 1 else "",
                   "agree": rec == closed and counting.formula_Cn(n, q, 1) == closed - 1}
            rows.append(row)
    return rows


def run_tables(args) -> int:
    fmt = _fmt(args)
    if args.table == "thmD":
        methods = [_method_key(s) for s in args.methods.split(",")]
        rows = _thmD_rows(args.p, args.n_max, args.m_max, methods, _budget(args))
    elif args.table == "thmA":
        rows = _thmA_rows(args.p, args.l_max, args.k_max, args.m_max, args.e, args.f)
    else:
        rows = _cn_rows([int(s) for s in args.q.split(",")], args.n_max)
    _emit(rows, fmt, args.out)
    bad = [r for r in rows if r.get("agree") is False]
    return EXIT_MISMATCH if bad else EXIT_OK


# -- replay -------------------------------------------------------------------

def _replay_one(rec, budget):
    """Recompute a record; returns the fresh record for comparison."""
    if "group" in rec:
        if "method" not in rec:  # a row of the thmD table
            methods = [m for m in _METHODS if m in rec]
            return _thmD_row(rec["group"], int(rec["n"]), int(rec["p"]), int(rec["m"]),
                             methods, budget), ()
        if "ring" in rec:
            ring = parse_ring(rec["ring"])
        else:
            ring = make_ring(int(rec["p"]), m=int(rec["m"]))
        res = _order(_method_key(rec["method"]), rec["group"], int(rec["n"]), ring, budget)
        return res.to_json(), ("value",)
    if "level" in rec:
        level = rec["level"]
        of = "group"
        if level.startswith("bound_"):
            level, of = "bound", level.split("_", 1)[1]
        fresh = _index_record(rec["family"], int(rec["l"]), int(rec["p"]), int(rec["e"]),
                              int(rec["f"]), int(rec["k"]), int(rec["m"]), level, of).to_json()
        return fresh, ("value", "preconditions")
    if "cosets" in rec:
        lat = lattice.build_family(rec["family"], int(rec["n"]))
        rep = endo.escape_sweep(lat, int(rec["p"]), int(rec["m"]), int(rec["k"]),
                                e=int(rec.get("e", 1)), f=int(rec.get("f", 1)),
                                precision=int(rec["precision"]), budget=budget,
                                defining_data=rec.get("defining_data"))
        return rep.to_json(), ("cosets", "by_case", "failures", "max_valuation")
    if "structure" in rec:
        fresh, _, _ = _structure_record(rec["structure"], int(rec["n"]), int(rec["p"]),
                                        int(rec.get("e", 1)), int(rec.get("f", 1)))
        return fresh, ("properties", "powerful_at_m_e", "passed")
    if "c_recursive" in rec:
        return _cn_rows([int(rec["q"])], int(rec["n"]))[-1], ("c_recursive", "c_closed", "C_n")
    if "structure_constants" in rec:
        return lattice.build_family(rec["family"], int(rec["n"])).to_json(), \
            ("basis", "roots", "structure_constants")
    raise CliError("unrecognised record")


def run_replay(path, budget) -> int:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    records = data if isinstance(data, list) else [data]
    mismatches = 0
    for rec in records:
        fresh, keys = _replay_one(rec, budget)
        keys = keys or tuple(k for k in rec if k not in ("elapsed_ms",))
        diff = {k: (rec.get(k), fresh.get(k)) for k in keys
                if json.dumps(rec.get(k), sort_keys=True) != json.dumps(fresh.get(k), sort_keys=True)}
        if diff:
            mismatches += 1
            print(f"mismatch: {diff}")
    print(f"replayed {len(records)} records, {mismatches} mismatches")
    return EXIT_MISMATCH if mismatches else EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_common(p, ring=True):
    p.add_argument("--format", choices=("text", "json", "csv"))
    p.add_argument("--out", help="write output to this file")
    p.add_argument("--budget", type=int, help="search budget (elements touched)")
    if ring:
        p.add_argument("--ring", help='ring such as "3^2", "GR(3,1,2):2,2,1" or "Eis(3,2):3,0,1"')
        p.add_argument("--p", type=int, default=3)
        p.add_argument("--m", type=int, default=1)
        p.add_argument("--e", type=int, default=1)
        p.add_argument("--f", type=int, default=1)
        p.add_argument("--poly", help="defining polynomial coefficients, constant term first")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lielat", description=__doc__.splitlines()[0])
    ap.add_argument("--replay", metavar="FILE", help="recompute the records in a JSON file")
    ap.add_argument("--budget", type=int, dest="top_budget")
    sub = ap.add_subparsers(dest="verb", parser_class=_Parser)

    ix = sub.add_parser("index", help="self-similarity index")
    ix.add_argument("--family", required=True, choices=("sl", "sp", "so_even", "so_odd"))
    ix.add_argument("--l", type=int, required=True)
    ix.add_argument("--p", type=int, required=True)
    ix.add_argument("--e", type=int, default=1)
    ix.add_argument("--f", type=int, default=1)
    ix.add_argument("--k", type=int, default=1)
    ix.add_argument("--m", type=int, default=None, help="defaults to e (0 for lattices)")
    ix.add_argument("--level", default="group",
                    choices=("group", "congruence", "lattice", "bound"))
    ix.add_argument("--of", default="group", choices=("group", "congruence"),
                    help="with --level bound: bound for the group or its congruence subgroup")
    ix.add_argument("--format", choices=("text", "json", "csv"))
    ix.add_argument("--out")

    od = sub.add_parser("order", help="order of a classical group over R/P^m")
    od.add_argument("--group", required=True, choices=counting.GROUPS)
    od.add_argument("--n", type=int, required=True)
    od.add_argument("--method", default="formula", choices=tuple(_METHODS))
    _add_common(od)

    vf = sub.add_parser("verify", help="cross-check orders, escape witnesses and lattice axioms")
    vsub = vf.add_subparsers(dest="what", required=True, parser_class=_Parser)
    vo = vsub.add_parser("order")
    vo.add_argument("--group", required=True, choices=counting.GROUPS)
    vo.add_argument("--n", type=int, required=True)
    vo.add_argument("--methods", default="formula,orbit,brute")
    _add_common(vo)
    ve = vsub.add_parser("escape")
    ve.add_argument("--family", required=True, choices=lattice.FAMILIES)
    ve.add_argument("--n", type=int, required=True)
    ve.add_argument("--k", type=int, default=1)
    ve.add_argument("--precision", type=int)
    _add_common(ve)
    vs = vsub.add_parser("structure")
    vs.add_argument("--family", required=True, choices=lattice.FAMILIES)
    vs.add_argument("--n", type=int, required=True)
    _add_common(vs)

    lt = sub.add_parser("lattice", help="dump basis, roots and structure constants")
    lt.add_argument("--family", required=True, choices=lattice.FAMILIES)
    lt.add_argument("--n", type=int, required=True)
    lt.add_argument("--k", type=int, help="also list the endomorphism weights for this k")
    lt.add_argument("--format", choices=("text", "json", "csv"))
    lt.add_argument("--out")

    tb = sub.add_parser("tables", help="reproduction tables")
    tsub = tb.add_subparsers(dest="table", required=True, parser_class=_Parser)
    td = tsub.add_parser("thmD")
    td.add_argument("--p", type=int, default=3)
    td.add_argument("--n-max", type=int, default=4)
    td.add_argument("--m-max", type=int, default=2)
    td.add_argument("--methods", default="formula,orbit")
    td.add_argument("--format", choices=("text", "json", "csv"))
    td.add_argument("--out")
    td.add_argument("--budget", type=int)
    ta = tsub.add_parser("thmA")
    ta.add_argument("--p", type=int, default=7)
    ta.add_argument("--e", type=int, default=1)
    ta.add_argument("--f", type=int, default=1)
    ta.add_argument("--l-max", type=int, default=2)
    ta.add_argument("--k-max", type=int, default=1)
    ta.add_argument("--m-max", type=int, default=1)
    ta.add_argument("--format", choices=("text", "json", "csv"))
    ta.add_argument("--out")
    tc = tsub.add_parser("cn")
    tc.add_argument("--q", default="3,5")
    tc.add_argument("--n-max", type=int, default=6)
    tc.add_argument("--format", choices=("text", "json", "csv"))
    tc.add_argument("--out")
    return ap


_DISPATCH = {
    "index": run_index,
    "order": run_order,
    "lattice": run_lattice,
    "tables": run_tables,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.replay:
            budget = args.top_budget if args.top_budget is not None else default_budget()
            return run_replay(args.replay, budget)
        if args.verb is None:
            ap.print_usage(sys.stderr)
            return EXIT_ERROR
        if args.verb == "verify":
            fn = {"order": run_verify_order, "escape": run_verify_escape,
                  "structure": run_verify_structure}[args.what]
        else:
            fn = _DISPATCH[args.verb]
        return fn(args)
    except ssindex.PreconditionViolation as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (CliError, RingError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
